#include "orprobe/circstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "orprobe/error.hpp"

namespace orprobe {

namespace {

struct Moments {
    double mean;
    double sd;
};

// Population moments; throws on a constant sample.
Moments sample_moments(std::span<const double> x) {
    const auto n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / n);
    const bool constant = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
    if (constant || !(sd > 0.0)) throw DegenerateSample("sample has zero variance");
    return {mean, sd};
}

void require_finite(std::span<const double> x) {
    for (double v : x) {
        if (!std::isfinite(v)) throw InvalidInput("sample contains non-finite values");
    }
}

}  // namespace

double circ_diff(double a_deg, double b_deg) {
    double r = std::fmod(a_deg - b_deg + 180.0, 360.0);
    if (r < 0.0) r += 360.0;
    if (r >= 360.0) r -= 360.0;
    r -= 180.0;
    return r == -180.0 ? 180.0 : r;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidInput("normal_quantile: p must lie in (0, 1)");

    // Acklam's rational approximation (rel. error ~1e-9) ...
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= 1 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        const double q = std::sqrt(-2 * std::log(1 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }

    // ... polished with Halley steps against erfc.
    for (int it = 0; it < 2; ++it) {
        const double e = normal_cdf(x) - p;
        const double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
        x = x - u / (1 + x * u / 2);
    }
    return x;
}

double kolmogorov_pvalue(double lambda) {
    if (!(lambda >= 0.0)) throw InvalidInput("kolmogorov_pvalue: lambda must be >= 0");
    if (lambda < 0.05) {
        // The alternating series stalls near 0; use the Jacobi-dual form
        //   1 - sqrt(2 pi)/lambda * sum exp(-(2k-1)^2 pi^2 / (8 lambda^2)),
        // whose first term is already below 1e-200 here.
        if (lambda == 0.0) return 1.0;
        double sum = 0.0;
        const double pi2 = std::numbers::pi * std::numbers::pi;
        for (int k = 1; k < 100; ++k) {
            const double t = std::exp(-(2.0 * k - 1) * (2.0 * k - 1) * pi2 / (8 * lambda * lambda));
            sum += t;
            if (t < 1e-300) break;
        }
        return std::clamp(1.0 - std::sqrt(2 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
    }
    double sum = 0.0;
    const double l2 = lambda * lambda;
    for (long k = 1;; ++k) {
        const double term = std::exp(-2.0 * static_cast<double>(k) * static_cast<double>(k) * l2);
        if (term < 1e-10) break;
        sum += (k % 2 == 1) ? term : -term;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KSReport ks_normal_test(std::span<const double> residuals) {
    if (residuals.size() < 8) {
        throw InvalidInput("K-S test needs at least 8 residuals, got " +
                           std::to_string(residuals.size()));
    }
    require_finite(residuals);
    const auto [mu, sigma] = sample_moments(residuals);

    std::vector<double> sorted(residuals.begin(), residuals.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    double stat = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double cdf = normal_cdf((sorted[i] - mu) / sigma);
        const double above = static_cast<double>(i + 1) / n - cdf;
        const double below = cdf - static_cast<double>(i) / n;
        stat = std::max({stat, above, below});
    }

    KSReport r;
    r.statistic = stat;
    r.n = sorted.size();
    r.mu_hat = mu;
    r.sigma_hat = sigma;
    r.p_value = kolmogorov_pvalue(std::sqrt(n) * stat);
    r.reject_at_05 = r.p_value < 0.05;
    return r;
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw InvalidInput("quantile of empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

DiagnosticsBundle diagnostics(std::span<const double> residuals, int bins) {
    if (residuals.size() < 4) throw InvalidInput("diagnostics need at least 4 residuals");
    if (bins < 1) throw InvalidInput("diagnostics need at least one histogram bin");
    require_finite(residuals);
    const auto [mu, sigma] = sample_moments(residuals);

    std::vector<double> x(residuals.begin(), residuals.end());
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    const auto nd = static_cast<double>(n);

    DiagnosticsBundle out;

    const double lo = x.front(), hi = x.back();
    const double width = (hi - lo) / bins;
    out.hist.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) out.hist.bin_edges[b] = lo + width * b;
    out.hist.bin_edges.back() = hi;
    out.hist.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double v : x) {
        auto b = static_cast<long>(std::floor((v - lo) / width));
        b = std::clamp(b, 0L, static_cast<long>(bins) - 1);
        ++out.hist.counts[static_cast<std::size_t>(b)];
    }

    out.qq.reserve(n);
    out.pp.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double pos = (static_cast<double>(i) + 0.5) / nd;
        out.qq.emplace_back(normal_quantile(pos) * sigma + mu, x[i]);
        out.pp.emplace_back(normal_cdf((x[i] - mu) / sigma), pos);
    }

    auto& box = out.box;
    box.median = quantile_sorted(x, 0.5);
    box.q1 = quantile_sorted(x, 0.25);
    box.q3 = quantile_sorted(x, 0.75);
    const double iqr = box.q3 - box.q1;
    const double fence_lo = box.q1 - 1.5 * iqr, fence_hi = box.q3 + 1.5 * iqr;
    box.whisker_lo = box.q1;
    box.whisker_hi = box.q3;
    for (double v : x) {
        if (v < fence_lo || v > fence_hi) {
            box.outliers.push_back(v);
        } else {
            box.whisker_lo = std::min(box.whisker_lo, v);
            box.whisker_hi = std::max(box.whisker_hi, v);
        }
    }
    return out;
}

nlohmann::json to_json(const KSReport& r) {
    return {{"statistic", r.statistic}, {"p_value", r.p_value},     {"n", r.n},
            {"mu_hat", r.mu_hat},       {"sigma_hat", r.sigma_hat}, {"reject_at_05", r.reject_at_05}};
}

nlohmann::json to_json(const DiagnosticsBundle& b) {
    auto pairs = [](const std::vector<std::pair<double, double>>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& [p, q] : v) a.push_back({p, q});
        return a;
    };
    return {
        {"hist", {{"bin_edges", b.hist.bin_edges}, {"counts", b.hist.counts}}},
        {"qq", pairs(b.qq)},
        {"pp", pairs(b.pp)},
        {"box",
         {{"median", b.box.median},
          {"q1", b.box.q1},
          {"q3", b.box.q3},
          {"whisker_lo", b.box.whisker_lo},
          {"whisker_hi", b.box.whisker_hi},
          {"outliers", b.box.outliers}}},
    };
}

}  // namespace orprobe
