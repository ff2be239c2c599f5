#include "orprobe/commands.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "orprobe/embedstore.hpp"
#include "orprobe/error.hpp"
#include "orprobe/png_io.hpp"

namespace fs = std::filesystem;

namespace orprobe {

namespace {

constexpr Condition kAllConditions[] = {Condition::FgOnly, Condition::BgOnly, Condition::BgFg};

void prepare_out_dir(const fs::path& dir) {
    if (dir.empty()) throw InvalidInput("an output directory is required");
    fs::create_directories(dir);
}

void require_file(const fs::path& p) {
    if (!fs::is_regular_file(p)) throw InvalidInput("missing file: " + p.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
    require_file(path);
    std::ifstream in(path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

nlohmann::json new_record(const std::string& command) {
    return {{"command", command}, {"inputs", nlohmann::json::object()},
            {"seeds", nlohmann::json::object()}, {"metrics", nlohmann::json::object()}};
}

void record_input(nlohmann::json& rec, const fs::path& p) {
    rec["inputs"][p.string()] = sha256_file(p);
}

nlohmann::json cv_json(const CvConfig& cv) {
    return {{"alpha_grid", cv.alpha_grid}, {"k", cv.k}, {"seed", cv.seed}};
}

nlohmann::json report_metrics(const ProbeReport& r) {
    return {{"mae_deg", r.mae_deg}, {"max_deg", r.max_deg}, {"min_deg", r.min_deg},
            {"n_test", r.residuals_deg.size()}};
}

std::string sha256_bytes(const void* data, std::size_t len) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int dlen = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data, len) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &dlen) != 1) {
        throw InternalError("sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < dlen; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::pair<int, int> parse_dims(const std::string& s) {
    const auto x = s.find('x');
    try {
        if (x == std::string::npos) throw std::invalid_argument(s);
        return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
    } catch (const std::exception&) {
        throw InvalidInput("expected WIDTHxHEIGHT, got '" + s + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

std::string sha256_file(const fs::path& path) {
    require_file(path);
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return sha256_bytes(bytes.data(), bytes.size());
}

nlohmann::json cmd_gen(const GenOptions& opt) {
    prepare_out_dir(opt.out_dir);
    auto rec = new_record("gen");
    rec["seeds"]["gen"] = opt.mode == GenMode::Planted || opt.mode == GenMode::PlantedConditions
                              ? opt.plant.seed
                              : opt.spec.seed;

    if (opt.mode == GenMode::Planted) {
        const auto planted = gen_planted_set(opt.plant);
        EmbeddingSet set = planted.set;
        set.set_id = opt.set_id;
        const fs::path out = opt.out_dir / (opt.set_id + ".orpb");
        write_set(set, out);
        write_labels_csv(set, opt.out_dir / "labels.csv");
        rec["metrics"] = {{"n", set.n}, {"d", set.d}, {"sha256", sha256_file(out)}};
        write_json(opt.out_dir / "run.json", rec);
        return rec;
    }
    if (opt.mode == GenMode::PlantedConditions) {
        const ConditionPlantSpec spec{opt.plant, opt.bg_k_active, opt.bg_scale};
        for (auto c : kAllConditions) {
            EmbeddingSet set = gen_condition_set(spec, c);
            set.set_id = opt.set_id + "_" + std::string(to_string(c));
            const fs::path out = opt.out_dir / (set.set_id + ".orpb");
            write_set(set, out);
            rec["metrics"][std::string(to_string(c))] = sha256_file(out);
        }
        write_json(opt.out_dir / "run.json", rec);
        return rec;
    }

    const fs::path image_dir = opt.out_dir / "images";
    fs::create_directories(image_dir);
    std::string digest_chain;
    const ImageSink sink = [&](const std::string& rel, const Image& img) {
        write_png(image_dir / rel, img);
        const auto data = img.data();
        digest_chain += sha256_bytes(data.data(), data.size());
    };

    DatasetManifest manifest;
    if (opt.mode == GenMode::Whole) {
        record_input(rec, opt.source);
        manifest = gen_whole_image_set(read_png(opt.source), opt.spec, opt.set_id, sink);
    } else {
        record_input(rec, opt.fg);
        const Image fg = read_png(opt.fg);
        Image bg;
        if (opt.bg_kind == BgKind::Natural) {
            record_input(rec, opt.bg);
            bg = read_png(opt.bg);
        } else {
            bg = gen_synthetic_background(opt.bg_kind, opt.bg_width, opt.bg_height, opt.period);
        }
        manifest = gen_blended_set(fg, bg, opt.spec, opt.condition, opt.set_id, sink, opt.bg_kind);
    }
    const fs::path manifest_path = opt.out_dir / "manifest.json";
    write_json(manifest_path, to_json(manifest));
    rec["metrics"] = {{"entries", manifest.entries.size()},
                      {"manifest_sha256", sha256_file(manifest_path)},
                      {"images_sha256", sha256_bytes(digest_chain.data(), digest_chain.size())}};
    write_json(opt.out_dir / "run.json", rec);
    return rec;
}

ProbeReport train_and_test(const EmbeddingSet& train, const EmbeddingSet& test,
                           std::uint64_t split_seed, const CvConfig& cv, CircularProbe* probe_out) {
    if (train.d != test.d) throw InvalidInput("train and test sets differ in feature dimension");
    const SplitIndex train_split = split_80_20(train, split_seed);
    const SplitIndex test_split = split_80_20(test, split_seed);
    const NormStats norm = normalize_fit(train, train_split.train_rows);
    const EmbeddingSet train_norm = normalize_apply(train, norm);
    CircularProbe probe = fit_probe(train_norm, train_split.train_rows, norm, cv);

    const EmbeddingSet test_norm =
        normalize_apply(select_rows(test, test_split.test_rows), norm);
    std::vector<std::size_t> rows(test_norm.n);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    ProbeReport report = evaluate(probe, test_norm, rows);
    if (probe_out) *probe_out = std::move(probe);
    return report;
}

nlohmann::json cmd_probe(const ProbeOptions& opt) {
    prepare_out_dir(opt.out_dir);
    auto rec = new_record("probe");
    record_input(rec, opt.train_set);
    const EmbeddingSet train = read_set(opt.train_set);
    EmbeddingSet test_storage;
    const EmbeddingSet* test = &train;
    if (opt.test_set && *opt.test_set != opt.train_set) {
        record_input(rec, *opt.test_set);
        test_storage = read_set(*opt.test_set);
        test = &test_storage;
    }

    CircularProbe probe;
    const ProbeReport report = train_and_test(train, *test, opt.split_seed, opt.cv, &probe);
    write_probe(probe, opt.out_dir / "probe.orpr");
    write_report_csv(report, opt.out_dir / (test->set_id + "_Degrees_labels_and_predictions.csv"));

    rec["seeds"] = {{"split", opt.split_seed}, {"cv", opt.cv.seed}};
    rec["cv"] = cv_json(opt.cv);
    rec["alpha"] = {{"sin", probe.alpha_sin}, {"cos", probe.alpha_cos}};
    rec["metrics"] = report_metrics(report);
    rec["metrics"]["alpha_sin"] = probe.alpha_sin;
    rec["metrics"]["alpha_cos"] = probe.alpha_cos;
    write_json(opt.out_dir / "run.json", rec);
    return rec;
}

std::vector<double> read_residuals_csv(const fs::path& path) {
    require_file(path);
    std::ifstream in(path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path.string() + ": empty CSV");
    const auto header = split(line, ',');
    const auto it = std::find(header.begin(), header.end(), "residual_deg");
    if (it == header.end()) throw FormatError(path.string() + ": no residual_deg column");
    const auto col = static_cast<std::size_t>(it - header.begin());
    std::vector<double> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size()) throw FormatError(path.string() + ": ragged row");
        try {
            out.push_back(std::stod(cells[col]));
        } catch (const std::exception&) {
            throw FormatError(path.string() + ": bad residual '" + cells[col] + "'");
        }
    }
    return out;
}

nlohmann::json cmd_stats(const StatsOptions& opt) {
    prepare_out_dir(opt.out_dir);
    auto rec = new_record("stats");
    record_input(rec, opt.predictions_csv);
    const auto residuals = read_residuals_csv(opt.predictions_csv);
    const KSReport ks = ks_normal_test(residuals);
    const DiagnosticsBundle diag = diagnostics(residuals, opt.bins);
    write_json(opt.out_dir / "ks.json", to_json(ks));
    write_json(opt.out_dir / "diagnostics.json", to_json(diag));
    rec["metrics"] = to_json(ks);
    write_json(opt.out_dir / "run.json", rec);
    return rec;
}

nlohmann::json cmd_subst(const SubstOptions& opt) {
    prepare_out_dir(opt.out_dir);
    auto rec = new_record("subst");
    record_input(rec, opt.probe);
    record_input(rec, opt.set);
    const CircularProbe probe = read_probe(opt.probe);
    const EmbeddingSet raw = read_set(opt.set);
    if (raw.d != probe.dim()) throw InvalidInput("probe and set differ in feature dimension");
    const EmbeddingSet set = normalize_apply(raw, probe.norm);

    // Anchor: the row whose label is circularly closest to the requested angle.
    std::size_t anchor_row = 0;
    for (std::size_t i = 1; i < set.n; ++i) {
        if (std::abs(circ_diff(set.angles_deg[i], opt.anchor_angle_deg)) <
            std::abs(circ_diff(set.angles_deg[anchor_row], opt.anchor_angle_deg))) {
            anchor_row = i;
        }
    }
    const auto a = set.row(anchor_row);
    const AnchorRecord anchor{{a.begin(), a.end()}, set.angles_deg[anchor_row], anchor_row};

    std::vector<std::size_t> targets;
    if (opt.all_targets) {
        for (std::size_t i = 0; i < set.n; ++i) targets.push_back(i);
    } else {
        targets = split_80_20(raw, opt.split_seed).test_rows;
    }
    const auto grid = opt.n_grid.empty() ? default_n_grid(set.d) : opt.n_grid;

    rec["seeds"] = {{"split", opt.split_seed}, {"random_mode", opt.seed}};
    rec["anchor"] = {{"row", anchor_row}, {"angle_deg", anchor.angle_deg}};
    for (auto mode : opt.modes) {
        const auto curve = convergence_curve(probe, anchor, set, targets, mode, grid, opt.seed);
        const std::string name(to_string(mode));
        write_curve_csv(curve, opt.out_dir / ("curve_" + name + ".csv"));
        rec["metrics"][name] = {
            {"threshold_n", curve.threshold_n ? nlohmann::json(*curve.threshold_n) : nlohmann::json()},
            {"y_first", curve.y_mean.front()},
            {"y_last", curve.y_mean.back()},
            {"targets", curve.target_rows.size()}};
    }
    write_json(opt.out_dir / "run.json", rec);
    return rec;
}

nlohmann::json cmd_matrix(const MatrixOptions& opt) {
    prepare_out_dir(opt.out_dir);
    auto rec = new_record("matrix");
    if (opt.sets.empty()) throw InvalidInput("matrix needs at least one condition set");

    std::map<Condition, EmbeddingSet> sets;
    for (const auto& [cond, path] : opt.sets) {
        record_input(rec, path);
        sets.emplace(cond, read_set(path));
    }
    auto pairs = opt.pairs;
    if (pairs.empty()) {
        for (const auto& [tr, _] : sets)
            for (const auto& [te, __] : sets) pairs.emplace_back(tr, te);
    }

    std::ofstream csv(opt.out_dir / "matrix.csv");
    csv.precision(17);
    csv << "train_condition,test_condition,mae_deg,max_deg,min_deg\n";
    for (const auto& [tr, te] : pairs) {
        if (!sets.count(tr) || !sets.count(te)) {
            throw InvalidInput("matrix pair references a condition without a set");
        }
        const ProbeReport r = train_and_test(sets.at(tr), sets.at(te), opt.split_seed, opt.cv);
        csv << to_string(tr) << ',' << to_string(te) << ',' << r.mae_deg << ',' << r.max_deg << ','
            << r.min_deg << '\n';
        rec["metrics"][std::string(to_string(tr)) + "->" + std::string(to_string(te))] =
            report_metrics(r);
    }
    rec["seeds"] = {{"split", opt.split_seed}, {"cv", opt.cv.seed}};
    rec["cv"] = cv_json(opt.cv);
    write_json(opt.out_dir / "run.json", rec);
    return rec;
}

namespace {

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& t : split(s, ',')) {
        try {
            out.push_back(std::stod(t));
        } catch (const std::exception&) {
            throw InvalidInput("not a number: '" + t + "'");
        }
    }
    return out;
}

template <typename T>
std::vector<T> parse_ints(const std::string& s) {
    std::vector<T> out;
    for (const auto& t : split(s, ',')) {
        try {
            out.push_back(static_cast<T>(std::stoll(t)));
        } catch (const std::exception&) {
            throw InvalidInput("not an integer: '" + t + "'");
        }
    }
    return out;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const FormatError*>(&e)) return 4;
    if (dynamic_cast<const DegenerateSample*>(&e) || dynamic_cast<const UndefinedAngle*>(&e)) return 5;
    if (const auto* inv = dynamic_cast<const InvalidInput*>(&e)) {
        const std::string msg = inv->what();
        return msg.rfind("missing file", 0) == 0 || msg.rfind("cannot open", 0) == 0 ? 3 : 2;
    }
    return 1;
}

const char* class_name(int code) {
    switch (code) {
        case 2: return "invalid-input";
        case 3: return "missing-file";
        case 4: return "format";
        case 5: return "degenerate-data";
        default: return "error";
    }
}

void add_cv_flags(CLI::App* app, std::string& grid, int& folds, std::uint64_t& cv_seed) {
    app->add_option("--alpha-grid", grid, "Comma-separated ridge penalties");
    app->add_option("--folds", folds, "Cross-validation folds")->capture_default_str();
    app->add_option("--cv-seed", cv_seed, "Fold shuffle seed")->capture_default_str();
}

CvConfig make_cv(const std::string& grid, int folds, std::uint64_t seed) {
    CvConfig cv;
    if (!grid.empty()) cv.alpha_grid = parse_doubles(grid);
    cv.k = folds;
    cv.seed = seed;
    cv.validate();
    return cv;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Orientation probing toolkit for vision-encoder embeddings"};
    app.require_subcommand(1);

    // gen
    GenOptions gen;
    std::string gen_mode = "whole", crop, diameters = "272,68,18", condition = "FG_ONLY",
                bg_kind = "natural", bg_size = "500x375", interp = "bilinear";
    auto* g = app.add_subcommand("gen", "Generate an image dataset or a planted embedding set");
    g->add_option("--mode", gen_mode, "whole | blended | planted | planted-conditions")
        ->capture_default_str();
    g->add_option("--source", gen.source, "Source PNG for whole-image sets");
    g->add_option("--fg", gen.fg, "Foreground PNG for blended sets");
    g->add_option("--bg", gen.bg, "Background PNG for blended sets");
    g->add_option("--bg-kind", bg_kind, "natural | chessboard | grid | hlines | vlines")
        ->capture_default_str();
    g->add_option("--bg-size", bg_size, "Synthetic background WIDTHxHEIGHT")->capture_default_str();
    g->add_option("--period", gen.period, "Synthetic background period")->capture_default_str();
    g->add_option("--condition", condition, "FG_ONLY | BG_ONLY | BG_FG")->capture_default_str();
    g->add_option("--start", gen.spec.angle_start, "First angle (deg)")->capture_default_str();
    g->add_option("--step", gen.spec.angle_step, "Angle increment (deg)")->capture_default_str();
    g->add_option("--count", gen.spec.angle_count, "Number of angles")->capture_default_str();
    g->add_option("--crop", crop, "Crop WIDTHxHEIGHT (default: rotation-safe)");
    g->add_option("--diameters", diameters, "Foreground diameters, largest first")
        ->capture_default_str();
    g->add_option("--feather", gen.spec.feather, "Mask feather width (px)")->capture_default_str();
    g->add_option("--interp", interp, "nearest | bilinear")->capture_default_str();
    g->add_option("--seed", gen.spec.seed, "Seed (images) / plant seed")->capture_default_str();
    g->add_option("--d", gen.plant.d, "Planted feature dimension")->capture_default_str();
    g->add_option("--k-active", gen.plant.k_active, "Planted active features")->capture_default_str();
    g->add_option("--signal-scale", gen.plant.signal_scale)->capture_default_str();
    g->add_option("--noise-sigma", gen.plant.noise_sigma)->capture_default_str();
    g->add_option("--distractor-sigma", gen.plant.distractor_sigma)->capture_default_str();
    g->add_option("--bg-k-active", gen.bg_k_active)->capture_default_str();
    g->add_option("--bg-scale", gen.bg_scale)->capture_default_str();
    g->add_option("--set-id", gen.set_id)->capture_default_str();
    g->add_option("--out", gen.out_dir, "Run directory")->required();

    // probe
    ProbeOptions probe;
    std::string probe_grid;
    std::string probe_test;
    auto* p = app.add_subcommand("probe", "Fit and evaluate a circular ridge probe");
    p->add_option("--train", probe.train_set, ".orpb training set")->required();
    p->add_option("--test", probe_test, ".orpb test set (default: the training set's 20% split)");
    p->add_option("--split-seed", probe.split_seed)->capture_default_str();
    add_cv_flags(p, probe_grid, probe.cv.k, probe.cv.seed);
    p->add_option("--out", probe.out_dir, "Run directory")->required();

    // stats
    StatsOptions stats;
    auto* s = app.add_subcommand("stats", "K-S normality test and plot data for residuals");
    s->add_option("--predictions", stats.predictions_csv, "Predictions CSV from `probe`")->required();
    s->add_option("--bins", stats.bins)->capture_default_str();
    s->add_option("--out", stats.out_dir, "Run directory")->required();

    // subst
    SubstOptions subst;
    std::string modes = "BY_WEIGHT,BY_ABSDIFF,RANDOM", n_grid;
    auto* u = app.add_subcommand("subst", "Feature-substitution convergence curves");
    u->add_option("--probe", subst.probe, ".orpr probe")->required();
    u->add_option("--set", subst.set, ".orpb set (raw, un-normalised)")->required();
    u->add_option("--modes", modes)->capture_default_str();
    u->add_option("--anchor-angle", subst.anchor_angle_deg)->capture_default_str();
    u->add_option("--n-grid", n_grid, "Comma-separated substitution counts");
    u->add_flag("--all-targets", subst.all_targets, "Use every row, not just the test split");
    u->add_option("--split-seed", subst.split_seed)->capture_default_str();
    u->add_option("--seed", subst.seed, "RANDOM-mode seed")->capture_default_str();
    u->add_option("--out", subst.out_dir, "Run directory")->required();

    // matrix
    MatrixOptions matrix;
    std::vector<std::string> matrix_sets, matrix_pairs;
    std::string matrix_grid;
    auto* m = app.add_subcommand("matrix", "Train/test condition cross-evaluation");
    m->add_option("--set", matrix_sets, "CONDITION=path.orpb (repeatable)")->required();
    m->add_option("--pair", matrix_pairs, "TRAIN:TEST condition pair (repeatable)");
    m->add_option("--split-seed", matrix.split_seed)->capture_default_str();
    add_cv_flags(m, matrix_grid, matrix.cv.k, matrix.cv.seed);
    m->add_option("--out", matrix.out_dir, "Run directory")->required();

    // replay
    fs::path replay_json, replay_out;
    auto* r = app.add_subcommand("replay", "Re-run a recorded invocation and compare metrics");
    r->add_option("run_json", replay_json)->required();
    r->add_option("--out", replay_out, "Directory for the re-run")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        nlohmann::json rec;
        fs::path out_dir;
        if (*g) {
            static const std::map<std::string, GenMode> kModes = {
                {"whole", GenMode::Whole},
                {"blended", GenMode::Blended},
                {"planted", GenMode::Planted},
                {"planted-conditions", GenMode::PlantedConditions}};
            if (!kModes.count(gen_mode)) throw InvalidInput("unknown gen mode '" + gen_mode + "'");
            gen.mode = kModes.at(gen_mode);
            gen.condition = parse_condition(condition);
            gen.bg_kind = parse_bg_kind(bg_kind);
            gen.spec.interp = parse_interp(interp);
            std::tie(gen.bg_width, gen.bg_height) = parse_dims(bg_size);
            if (!crop.empty()) std::tie(gen.spec.crop_w, gen.spec.crop_h) = parse_dims(crop);
            gen.spec.fg_diameters = parse_ints<int>(diameters);
            gen.plant.seed = gen.spec.seed;
            gen.plant.n_angles = gen.spec.angle_count;
            gen.plant.angle_step = gen.spec.angle_step;
            gen.plant.angle_start = gen.spec.angle_start;
            rec = cmd_gen(gen);
            out_dir = gen.out_dir;
        } else if (*p) {
            probe.cv = make_cv(probe_grid, probe.cv.k, probe.cv.seed);
            if (!probe_test.empty()) probe.test_set = probe_test;
            rec = cmd_probe(probe);
            out_dir = probe.out_dir;
        } else if (*s) {
            rec = cmd_stats(stats);
            out_dir = stats.out_dir;
        } else if (*u) {
            subst.modes.clear();
            for (const auto& t : split(modes, ',')) subst.modes.push_back(parse_selection_mode(t));
            if (!n_grid.empty()) subst.n_grid = parse_ints<std::size_t>(n_grid);
            rec = cmd_subst(subst);
            out_dir = subst.out_dir;
        } else if (*m) {
            matrix.cv = make_cv(matrix_grid, matrix.cv.k, matrix.cv.seed);
            for (const auto& item : matrix_sets) {
                const auto eq = item.find('=');
                if (eq == std::string::npos) throw InvalidInput("expected CONDITION=path, got " + item);
                matrix.sets[parse_condition(item.substr(0, eq))] = item.substr(eq + 1);
            }
            for (const auto& item : matrix_pairs) {
                const auto parts = split(item, ':');
                if (parts.size() != 2) throw InvalidInput("expected TRAIN:TEST, got " + item);
                matrix.pairs.emplace_back(parse_condition(parts[0]), parse_condition(parts[1]));
            }
            rec = cmd_matrix(matrix);
            out_dir = matrix.out_dir;
        } else if (*r) {
            const bool same = replay_run(replay_json, replay_out);
            std::cout << (same ? "replay: metrics identical\n" : "replay: metrics differ\n");
            return same ? 0 : 1;
        }

        // Record the invocation itself so the run can be replayed.
        rec["argv"] = args;
        write_json(out_dir / "run.json", rec);
        std::cout << rec["metrics"].dump() << '\n';
        return 0;
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        std::cerr << "error[" << class_name(code) << "]: " << e.what() << '\n';
        return code;
    }
}

bool replay_run(const fs::path& run_json, const fs::path& out_dir) {
    const auto rec = read_json(run_json);
    if (!rec.contains("argv")) throw FormatError(run_json.string() + ": no recorded argv");
    auto argv = rec.at("argv").get<std::vector<std::string>>();
    bool replaced = false;
    for (std::size_t i = 0; i + 1 < argv.size(); ++i) {
        if (argv[i] == "--out") {
            argv[i + 1] = out_dir.string();
            replaced = true;
        }
    }
    if (!replaced) throw FormatError(run_json.string() + ": recorded argv has no --out");
    if (run_cli(argv) != 0) return false;
    const auto again = read_json(out_dir / "run.json");
    return again.at("metrics") == rec.at("metrics") && again.at("inputs") == rec.at("inputs");
}

}  // namespace orprobe
