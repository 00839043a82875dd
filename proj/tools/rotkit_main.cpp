// Command-line front door: representation conversion, metric evaluation,
// experiment execution, and figure emission.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
// failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "rotkit/config.hpp"
#include "rotkit/csv.hpp"
#include "rotkit/errors.hpp"
#include "rotkit/experiments.hpp"
#include "rotkit/kernels.hpp"
#include "rotkit/metrics.hpp"
#include "rotkit/projections.hpp"
#include "rotkit/representations.hpp"
#include "rotkit/svg.hpp"
#include "rotkit/version.hpp"

namespace fs = std::filesystem;
using namespace rotkit;

namespace {

fs::path resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("ROTKIT_OUT")) return env;
    return "./out";
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write " + path.string());
    f << content;
}

// ---------------------------------------------------------------------------
// convert
// ---------------------------------------------------------------------------

int cmd_convert(const std::string& in, const std::string& from_tag,
                const std::string& to_tag, const std::string& out) {
    RepKind from = rep_kind_from_tag(from_tag);
    RepKind to = rep_kind_from_tag(to_tag);
    io::RepFile rf = io::read_rep_csv(in);
    if (rf.kind != from)
        throw DataError("input file declares rep=" + rep_tag(rf.kind) +
                        ", expected " + rep_tag(from));
    bool planar_from = from == RepKind::angle2d || from == RepKind::sincos2d;
    bool planar_to = to == RepKind::angle2d || to == RepKind::sincos2d;
    if (planar_from != planar_to)
        throw ConfigError("cannot convert between planar and 3D representations");
    std::vector<std::vector<double>> rows;
    rows.reserve(rf.rows.size());
    for (const auto& row : rf.rows) {
        Representation r = rep_from_vector(from, row);
        Representation converted;
        if (planar_from) {
            if (from == to) {
                converted = r;
            } else if (to == RepKind::sincos2d) {
                converted = angle_to_sincos(std::get<Angle2D>(r));
            } else {
                converted = sincos_to_angle(std::get<SinCos2D>(r));
            }
        } else {
            converted = from_matrix(to, to_matrix(r));
        }
        rows.push_back(rep_to_vector(converted));
    }
    io::write_rep_csv(out, to, rows);
    return 0;
}

// ---------------------------------------------------------------------------
// distance
// ---------------------------------------------------------------------------

int cmd_distance(const std::string& in, const std::string& metric_tag_str,
                 const std::string& out) {
    MetricKind metric = metric_kind_from_tag(metric_tag_str);
    io::RepFile rf = io::read_rep_csv(in);
    if (rf.rows.size() % 2 != 0)
        throw DataError("distance input must hold an even number of rows "
                        "(consecutive rows form pairs)");
    io::CsvTable t;
    t.header = {"pair", "distance"};
    for (std::size_t i = 0; i + 1 < rf.rows.size(); i += 2) {
        const auto& a = rf.rows[i];
        const auto& b = rf.rows[i + 1];
        double d = 0.0;
        switch (metric) {
            case MetricKind::l2: d = l2_distance(a, b); break;
            case MetricKind::l1: d = l1_distance(a, b); break;
            case MetricKind::cosine_dist: d = cosine_distance(a, b); break;
            case MetricKind::angular_dist: d = angular_distance(a, b); break;
            case MetricKind::quat_pick_i:
            case MetricKind::quat_pick_ii: {
                if (rf.kind != RepKind::quat)
                    throw DataError("quaternion metrics need rep=quat rows");
                UnitQuaternion qa{a[0], a[1], a[2], a[3]};
                UnitQuaternion qb{b[0], b[1], b[2], b[3]};
                d = metric == MetricKind::quat_pick_i ? quat_pick_i(qa, qb)
                                                      : quat_pick_ii(qa, qb);
                break;
            }
            case MetricKind::euler_pick: {
                if (rf.kind != RepKind::euler)
                    throw DataError("eulerpick needs rep=euler rows");
                d = euler_pick({a[0], a[1], a[2]}, {b[0], b[1], b[2]});
                break;
            }
            case MetricKind::chordal:
            case MetricKind::chordal_sq:
            case MetricKind::geodesic: {
                RotationMatrix ra = to_matrix(rep_from_vector(rf.kind, a));
                RotationMatrix rb = to_matrix(rep_from_vector(rf.kind, b));
                d = metric == MetricKind::chordal      ? chordal(ra, rb)
                    : metric == MetricKind::chordal_sq ? chordal_sq(ra, rb)
                                                       : geodesic(ra, rb);
                break;
            }
        }
        t.rows.push_back({std::to_string(i / 2), io::format_double(d)});
    }
    io::write_csv(out, t);
    return 0;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct RunCommon {
    std::string config_path;
    std::string out_dir_flag;
    std::string name; // output stem; defaults to the experiment tag
    uint64_t seed = 0;
    bool seed_set = false;
    std::vector<std::string> sets; // key=value overrides
};

io::Config load_run_config(const RunCommon& rc) {
    io::Config cfg;
    if (!rc.config_path.empty()) cfg = io::Config::from_file(rc.config_path);
    for (const auto& kv : rc.sets) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (rc.seed_set) cfg.set("seed", std::to_string(rc.seed));
    return cfg;
}

void write_meta(const fs::path& path, const io::Config& cfg,
                experiments::Meta& meta) {
    meta.add("version", std::string(kVersion));
    meta.add("kernel_backend",
             kernels::backend_name(kernels::active_backend()));
    for (const auto& [k, v] : cfg.entries()) meta.add("config." + k, v);
    meta.write(path.string());
}

int cmd_run(const std::string& experiment, const RunCommon& rc) {
    io::Config cfg = load_run_config(rc);
    fs::path out_dir = resolve_out_dir(rc.out_dir_flag);
    fs::create_directories(out_dir);
    std::string stem = rc.name.empty() ? experiment : rc.name;
    fs::path csv_path = out_dir / (stem + ".csv");
    fs::path meta_path = out_dir / (stem + ".meta");
    uint64_t seed = cfg.get_seed("seed", 0);
    experiments::Meta meta;
    meta.add("experiment_tag", experiment);
    meta.add_seed("seed", seed);

    if (experiment == "lipschitz") {
        cfg.require_known({"seed", "rep", "pairs"});
        auto reps = cfg.get_string_list(
            "rep", {"euler", "exp", "axisangle", "quat", "mrp", "sixd", "nined"});
        long pairs = cfg.get_long("pairs", 10000);
        io::CsvTable t;
        t.header = {"rep", "d_so3", "d_repr"};
        for (const auto& rep : reps) {
            RepKind k = rep_kind_from_tag(rep);
            auto rows = experiments::lipschitz_scan(
                k, static_cast<int>(pairs),
                experiments::cell_seed(seed, {static_cast<uint64_t>(k)}));
            for (const auto& r : rows)
                t.rows.push_back({r.rep, io::format_double(r.d_so3),
                                  io::format_double(r.d_repr)});
            meta.add("width." + rep, experiments::representation_width(k));
        }
        meta.add("pairs_per_rep", pairs);
        meta.add("strata",
                 std::string("independent:2, local:1, boundary:1 per 4 pairs"));
        io::write_csv(csv_path.string(), t);
    } else if (experiment == "gradpaths") {
        cfg.require_known({"seed", "projection", "runs", "iters", "lr",
                           "momentum", "degenerate_probe"});
        auto projs = cfg.get_string_list("projection", {"gso", "svd_plus"});
        long runs = cfg.get_long("runs", 50);
        long iters = cfg.get_long("iters", 150);
        double lr = cfg.get_double("lr", 0.05);
        double momentum = cfg.get_double("momentum", 0.9);
        bool probe = cfg.get_bool("degenerate_probe", true);
        io::CsvTable t;
        t.header = {"run", "iter", "vector", "comp_x", "comp_y", "comp_z", "loss"};
        for (const auto& proj : projs) {
            bool is_gso = proj == "gso";
            if (!is_gso && proj != "svd_plus")
                throw ConfigError("projection must be gso or svd_plus");
            auto res = experiments::gradient_paths(
                is_gso ? experiments::ProjKind::gso
                       : experiments::ProjKind::svd_plus,
                static_cast<int>(runs), static_cast<int>(iters), lr, momentum,
                experiments::cell_seed(seed, {is_gso ? 1ULL : 2ULL}),
                is_gso && probe);
            for (const auto& r : res.rows)
                t.rows.push_back({proj + "/" + std::to_string(r.run),
                                  std::to_string(r.iter), r.vector_name,
                                  io::format_double(r.x), io::format_double(r.y),
                                  io::format_double(r.z),
                                  io::format_double(r.loss)});
            std::string flagged;
            for (int u : res.unstable_runs)
                flagged += (flagged.empty() ? "" : " ") + std::to_string(u);
            meta.add("unstable_runs." + proj,
                     flagged.empty() ? "none" : flagged);
        }
        meta.add("lr", lr);
        meta.add("momentum", momentum);
        meta.add("iters", iters);
        meta.add("init", std::string("per-coordinate uniform in [-2, 2]"));
        io::write_csv(csv_path.string(), t);
    } else if (experiment == "gradratio") {
        cfg.require_known({"seed", "n", "box"});
        long n = cfg.get_long("n", 20000);
        double box = cfg.get_double("box", 2.0);
        auto res = experiments::gradient_ratio_density(static_cast<int>(n), box,
                                                       seed);
        io::CsvTable t;
        t.header = {"projection", "ratio_pair", "ratio"};
        for (const auto& r : res.rows)
            t.rows.push_back({r.projection, r.ratio_pair,
                              io::format_double(r.ratio)});
        meta.add("n", n);
        meta.add("box", box);
        meta.add("skipped.gso", res.skipped_gso);
        meta.add("skipped.svd_plus", res.skipped_svd);
        io::write_csv(csv_path.string(), t);
    } else if (experiment == "fourier") {
        cfg.require_known({"seed", "nb", "reps", "seeds", "train_n", "val_n",
                           "test_n", "epochs", "lr", "batch", "hidden",
                           "t_hidden", "aug_epsilon", "threads"});
        experiments::FourierParams p;
        p.master_seed = seed;
        p.n_b = cfg.get_long_list("nb", p.n_b);
        p.reps = cfg.get_string_list("reps", p.reps);
        p.seeds = cfg.get_long_list("seeds", p.seeds);
        p.train_n = static_cast<int>(cfg.get_long("train_n", p.train_n));
        p.val_n = static_cast<int>(cfg.get_long("val_n", p.val_n));
        p.test_n = static_cast<int>(cfg.get_long("test_n", p.test_n));
        p.epochs = static_cast<int>(cfg.get_long("epochs", p.epochs));
        p.lr = cfg.get_double("lr", p.lr);
        p.batch = static_cast<int>(cfg.get_long("batch", p.batch));
        p.hidden = static_cast<int>(cfg.get_long("hidden", p.hidden));
        p.t_hidden = static_cast<int>(cfg.get_long("t_hidden", p.t_hidden));
        p.aug_epsilon = cfg.get_double("aug_epsilon", p.aug_epsilon);
        p.threads = static_cast<int>(cfg.get_long("threads", 0));
        auto rows = experiments::fourier_experiment(p, &meta);
        io::CsvTable t;
        t.header = {"rep", "n_b", "seed", "rmse_train", "rmse_val", "rmse_test"};
        for (const auto& r : rows)
            t.rows.push_back({r.rep, std::to_string(r.n_b),
                              std::to_string(r.seed),
                              io::format_double(r.rmse_train),
                              io::format_double(r.rmse_val),
                              io::format_double(r.rmse_test)});
        io::write_csv(csv_path.string(), t);
    } else if (experiment == "toyest") {
        cfg.require_known({"seed", "grid", "seeds", "n_points", "sigma",
                           "train_n", "val_n", "test_n", "hidden",
                           "max_epochs", "patience", "lr", "batch", "threads"});
        experiments::ToyParams p;
        p.master_seed = seed;
        if (cfg.has("grid")) {
            p.grid.clear();
            for (const auto& cell : cfg.get_string_list("grid", {})) {
                std::size_t colon = cell.find(':');
                if (colon == std::string::npos)
                    throw ConfigError("grid cells are rep:loss, got '" + cell + "'");
                p.grid.emplace_back(cell.substr(0, colon), cell.substr(colon + 1));
            }
        } else {
            p.grid = experiments::toy_default_grid();
        }
        p.seeds = cfg.get_long_list("seeds", p.seeds);
        p.n_points = static_cast<int>(cfg.get_long("n_points", p.n_points));
        p.sigma = cfg.get_double("sigma", p.sigma);
        p.train_n = static_cast<int>(cfg.get_long("train_n", p.train_n));
        p.val_n = static_cast<int>(cfg.get_long("val_n", p.val_n));
        p.test_n = static_cast<int>(cfg.get_long("test_n", p.test_n));
        p.hidden = static_cast<int>(cfg.get_long("hidden", p.hidden));
        p.max_epochs = static_cast<int>(cfg.get_long("max_epochs", p.max_epochs));
        p.patience = static_cast<int>(cfg.get_long("patience", p.patience));
        p.lr = cfg.get_double("lr", p.lr);
        p.batch = static_cast<int>(cfg.get_long("batch", p.batch));
        p.threads = static_cast<int>(cfg.get_long("threads", 0));
        auto rows = experiments::toy_rotation_estimation(p, &meta);
        io::CsvTable t;
        t.header = {"rep", "loss", "seed", "geodesic_med", "chordal_med"};
        for (const auto& r : rows)
            t.rows.push_back({r.rep, r.loss, std::to_string(r.seed),
                              io::format_double(r.geodesic_med),
                              io::format_double(r.chordal_med)});
        io::write_csv(csv_path.string(), t);
    } else if (experiment == "distfield") {
        cfg.require_known({"seed", "metrics", "resolution"});
        auto tags = cfg.get_string_list("metrics",
                                        {"l2", "l1", "cosine", "angular"});
        long res = cfg.get_long("resolution", 21);
        std::vector<MetricKind> ms;
        for (const auto& tag : tags) ms.push_back(metric_kind_from_tag(tag));
        auto fields =
            experiments::distance_field_export(ms, static_cast<int>(res));
        for (const auto& f : fields) {
            io::CsvTable t;
            t.header = {"y1", "y2", "gx", "gy", "defined"};
            for (const auto& s : f.samples)
                t.rows.push_back({io::format_double(s.point.x),
                                  io::format_double(s.point.y),
                                  io::format_double(s.neg_gradient.x),
                                  io::format_double(s.neg_gradient.y),
                                  s.defined ? "1" : "0"});
            fs::path p = out_dir / (stem + "_" + metric_tag(f.metric) + ".csv");
            io::write_csv(p.string(), t);
        }
        meta.add("resolution", res);
        meta.add("target", std::string("(1, 0)"));
        write_meta(meta_path, cfg, meta);
        return 0;
    } else {
        throw ConfigError("unknown experiment: " + experiment +
                          " (expected lipschitz | gradpaths | gradratio | "
                          "fourier | toyest | distfield)");
    }
    write_meta(meta_path, cfg, meta);
    return 0;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

int cmd_bench(const RunCommon& rc) {
    io::Config cfg = load_run_config(rc);
    cfg.require_known({"seed", "batches", "repetitions", "warmup"});
    fs::path out_dir = resolve_out_dir(rc.out_dir_flag);
    fs::create_directories(out_dir);
    std::string stem = rc.name.empty() ? "bench" : rc.name;
    auto batches = cfg.get_long_list("batches", {1, 32, 256, 1024});
    long repetitions = cfg.get_long("repetitions", 100);
    long warmup = cfg.get_long("warmup", 10);
    uint64_t seed = cfg.get_seed("seed", 0);
    experiments::Meta meta;
    meta.add("experiment_tag", std::string("bench"));
    meta.add_seed("seed", seed);
    auto rows = experiments::bench_projections(
        batches, static_cast<int>(repetitions), static_cast<int>(warmup), seed,
        &meta);
    io::CsvTable t;
    t.header = {"op", "batch", "median_ms"};
    for (const auto& r : rows)
        t.rows.push_back({r.op, std::to_string(r.batch),
                          io::format_double(r.median_ms)});
    io::write_csv((out_dir / (stem + ".csv")).string(), t);
    write_meta(out_dir / (stem + ".meta"), cfg, meta);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rotation representation toolkit"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    // convert
    auto* convert = app.add_subcommand("convert", "Convert representation files");
    std::string c_in, c_from, c_to, c_out = "converted.csv";
    convert->add_option("--in", c_in, "input representation csv")->required();
    convert->add_option("--from", c_from, "source representation tag")->required();
    convert->add_option("--to", c_to, "target representation tag")->required();
    convert->add_option("--out", c_out, "output path");

    // distance
    auto* distance = app.add_subcommand("distance", "Evaluate a metric on row pairs");
    std::string d_in, d_metric, d_out = "distances.csv";
    distance->add_option("--in", d_in, "input representation csv (paired rows)")
        ->required();
    distance->add_option("--metric", d_metric, "metric tag")->required();
    distance->add_option("--out", d_out, "output path");

    // run
    auto* run = app.add_subcommand("run", "Run an experiment");
    std::string r_experiment;
    RunCommon rc;
    run->add_option("experiment", r_experiment,
                    "lipschitz | gradpaths | gradratio | fourier | toyest | distfield")
        ->required();
    run->add_option("--config", rc.config_path, "config file (key = value lines)");
    run->add_option("--out-dir", rc.out_dir_flag,
                    "output directory (default ./out, env ROTKIT_OUT)");
    run->add_option("--name", rc.name, "output file stem");
    auto* seed_opt = run->add_option("--seed", rc.seed, "master seed");
    run->add_option("--set", rc.sets, "config override key=value (repeatable)");
    // Frequent settings as direct flags.
    std::vector<std::pair<std::string, std::string>> direct;
    for (const char* key : {"rep", "pairs", "projection", "runs", "iters",
                            "lr", "momentum", "n", "box", "nb", "reps",
                            "seeds", "threads", "grid", "sigma", "epochs"}) {
        direct.emplace_back(key, "");
    }
    for (auto& [key, slot] : direct)
        run->add_option("--" + key, slot, "config key " + key);

    // plot
    auto* plot = app.add_subcommand("plot", "Render a result csv as SVG");
    std::string p_in, p_kind, p_out = "plot.svg";
    plot->add_option("--in", p_in, "input csv")->required();
    plot->add_option("--kind", p_kind, "scatter | density | vecfield | paths")
        ->required();
    plot->add_option("--out", p_out, "output svg path");

    // bench
    auto* bench = app.add_subcommand("bench", "Time the projection forward passes");
    RunCommon bc;
    bench->add_option("--config", bc.config_path, "config file");
    bench->add_option("--out-dir", bc.out_dir_flag, "output directory");
    bench->add_option("--name", bc.name, "output file stem");
    auto* bseed_opt = bench->add_option("--seed", bc.seed, "seed");
    bench->add_option("--set", bc.sets, "config override key=value");
    std::string b_batches, b_reps, b_warmup;
    bench->add_option("--batches", b_batches, "batch sizes, e.g. 1,32,256,1024");
    bench->add_option("--repetitions", b_reps, "timing repetitions");
    bench->add_option("--warmup", b_warmup, "warmup iterations");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*convert) return cmd_convert(c_in, c_from, c_to, c_out);
        if (*distance) return cmd_distance(d_in, d_metric, d_out);
        if (*run) {
            rc.seed_set = seed_opt->count() > 0;
            for (const auto& [key, slot] : direct)
                if (!slot.empty()) rc.sets.push_back(key + "=" + slot);
            return cmd_run(r_experiment, rc);
        }
        if (*plot) {
            io::CsvTable t = io::read_csv(p_in);
            write_text(p_out, io::render_plot(t, io::plot_kind_from_tag(p_kind)));
            return 0;
        }
        if (*bench) {
            bc.seed_set = bseed_opt->count() > 0;
            if (!b_batches.empty()) bc.sets.push_back("batches=" + b_batches);
            if (!b_reps.empty()) bc.sets.push_back("repetitions=" + b_reps);
            if (!b_warmup.empty()) bc.sets.push_back("warmup=" + b_warmup);
            return cmd_bench(bc);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
