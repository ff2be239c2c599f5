#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace orprobe {

/// Signed circular difference a - b in degrees, in (-180, 180].
double circ_diff(double a_deg, double b_deg);

/// Standard normal CDF.
double normal_cdf(double z);

/// Inverse standard normal CDF for p in (0, 1).
double normal_quantile(double p);

/// Asymptotic Kolmogorov survival function
///   Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2),
/// truncated once terms drop below 1e-10 and clamped to [0, 1].
double kolmogorov_pvalue(double lambda);

struct KSReport {
    double statistic = 0.0;
    double p_value = 0.0;
    std::size_t n = 0;
    double mu_hat = 0.0;
    double sigma_hat = 0.0;
    bool reject_at_05 = false;
};

/// One-sample K-S test against a normal whose mean and (population) std are
/// estimated from the sample itself. The p-value uses the standard
/// Kolmogorov distribution, which is conservative with estimated
/// parameters. Requires n >= 8 and a non-constant sample.
KSReport ks_normal_test(std::span<const double> residuals);

struct Histogram {
    std::vector<double> bin_edges;
    std::vector<std::size_t> counts;
};

struct BoxSummary {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double whisker_lo = 0.0;
    double whisker_hi = 0.0;
    std::vector<double> outliers;
};

struct DiagnosticsBundle {
    Histogram hist;
    std::vector<std::pair<double, double>> qq;  // (theoretical, sample)
    std::vector<std::pair<double, double>> pp;  // (theoretical cdf, empirical cdf)
    BoxSummary box;
};

/// Data behind the histogram, Q-Q, P-P and box plots. Plotting positions
/// are (i - 0.5) / n; quartiles interpolate linearly between order
/// statistics; whiskers reach the furthest points within 1.5 IQR.
DiagnosticsBundle diagnostics(std::span<const double> residuals, int bins);

/// Linear-interpolation quantile of sorted data, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

nlohmann::json to_json(const KSReport& r);
nlohmann::json to_json(const DiagnosticsBundle& b);

}  // namespace orprobe
