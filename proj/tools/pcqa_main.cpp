// pcqa command-line frontend: synthetic dataset generation, projection
// dumps, training, stochastic scoring, metric evaluation and the ablation
// grid. Exit codes: 0 success, 1 usage error, 2 data error, 3 divergence.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcqa/config_io.hpp"
#include "pcqa/dataset.hpp"
#include "pcqa/metrics.hpp"
#include "pcqa/ply.hpp"
#include "pcqa/predict.hpp"
#include "pcqa/trainer.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kToolVersion = "1.0.0";
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDivergence = 3;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Every command records how it was invoked; identical invocations produce
// identical headers (no timestamps by design).
void write_run_header(const fs::path& out_dir, const std::string& command,
                      const std::vector<std::string>& argv, const json& config) {
    fs::create_directories(out_dir);
    json j;
    j["tool"] = "pcqa";
    j["version"] = kToolVersion;
    j["command"] = command;
    j["argv"] = argv;
    j["config"] = config;
    std::ofstream out(out_dir / "run_header.json", std::ios::binary);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write run header in '" + out_dir.string() + "'");
}

int default_jobs() {
    if (const char* env = std::getenv("PCQA_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

struct ScoreRow {
    std::string id;
    double mos = 0.0;
    bool has_mos = false;
    pcqa::QualityPrediction pred;
};

double rating_std(const std::vector<double>& r) {
    if (r.size() < 2) return 0.0;
    double m = 0.0;
    for (double x : r) m += x;
    m /= static_cast<double>(r.size());
    double s = 0.0;
    for (double x : r) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(r.size() - 1));
}

void write_predictions_csv(const std::vector<ScoreRow>& rows, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    out << "id,final,rating_mean,rating_std,n_ratings,mos\n";
    for (const auto& r : rows) {
        double mean = 0.0;
        for (double x : r.pred.ratings) mean += x;
        mean /= static_cast<double>(r.pred.ratings.size());
        out << r.id << "," << fmt(r.pred.final_score) << "," << fmt(mean) << ","
            << fmt(rating_std(r.pred.ratings)) << "," << r.pred.ratings.size() << ","
            << (r.has_mos ? fmt(r.mos) : "") << "\n";
    }
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

void write_ratings_dump(const std::vector<ScoreRow>& rows, const fs::path& dir, double mos_min,
                        double mos_max) {
    std::ofstream rout(dir / "ratings.csv", std::ios::binary);
    rout << "id,sample_index,rating\n";
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.pred.ratings.size(); ++i)
            rout << r.id << "," << i << "," << fmt(r.pred.ratings[i]) << "\n";

    constexpr int kBins = 20;
    std::ofstream hout(dir / "histograms.csv", std::ios::binary);
    hout << "id,bin_lo,bin_hi,count\n";
    const double span = mos_max - mos_min;
    for (const auto& r : rows) {
        std::array<int, kBins> counts{};
        for (double x : r.pred.ratings) {
            int b = static_cast<int>((x - mos_min) / span * kBins);
            b = std::min(std::max(b, 0), kBins - 1);
            ++counts[static_cast<std::size_t>(b)];
        }
        for (int b = 0; b < kBins; ++b) {
            const double lo = mos_min + span * b / kBins, hi = mos_min + span * (b + 1) / kBins;
            hout << r.id << "," << fmt(lo) << "," << fmt(hi) << ","
                 << counts[static_cast<std::size_t>(b)] << "\n";
        }
    }
}

void write_metric_report(const pcqa::MetricReport& rep, const fs::path& dir) {
    json j;
    j["srcc"] = rep.srcc;
    j["plcc"] = rep.plcc;
    j["krcc"] = rep.krcc;
    j["rmse"] = rep.rmse;
    j["logistic_beta"] = rep.beta;
    j["fit_converged"] = rep.fit_converged;
    std::ofstream out(dir / "metrics.json", std::ios::binary);
    out << j.dump(2) << "\n";
    std::ofstream csv(dir / "metrics.csv", std::ios::binary);
    csv << "srcc,plcc,krcc,rmse\n"
        << fmt(rep.srcc) << "," << fmt(rep.plcc) << "," << fmt(rep.krcc) << "," << fmt(rep.rmse) << "\n";
}

void print_metric_report(const pcqa::MetricReport& rep, std::ostream& os) {
    os << std::left << std::setw(8) << "SRCC" << std::setw(8) << "PLCC" << std::setw(8) << "KRCC"
       << std::setw(8) << "RMSE" << "\n"
       << std::setprecision(4) << std::fixed << std::setw(8) << rep.srcc << std::setw(8) << rep.plcc
       << std::setw(8) << rep.krcc << std::setw(8) << rep.rmse << "\n";
    os.unsetf(std::ios::fixed);
    os << std::setprecision(6);
}

std::vector<ScoreRow> score_records(const pcqa::RestoredModel& rm,
                                    const std::vector<const pcqa::ManifestRecord*>& records,
                                    const fs::path& data_root, int samples, pcqa::AverageMode mode,
                                    std::uint64_t seed, double mos_min, double mos_max) {
    std::vector<ScoreRow> rows;
    rows.reserve(records.size());
    for (const auto* rec : records) {
        const pcqa::PointCloud pc = pcqa::load_ply(data_root / rec->path);
        ScoreRow row;
        row.id = rec->id;
        row.mos = rec->mos;
        row.has_mos = true;
        // Per-stimulus stream keyed by id: scoring order cannot matter.
        row.pred = pcqa::predict(rm, pc, samples, mode,
                                 pcqa::mix_seed({seed, pcqa::fnv1a_str(rec->id)}), mos_min, mos_max);
        row.pred.id = rec->id;
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---- subcommand payloads --------------------------------------------------

struct GenDataArgs {
    std::string out;
    std::string preset = "desk";
    pcqa::GenConfig cfg;
};

int run_gen_data(const GenDataArgs& a, const std::vector<std::string>& argv) {
    if (a.preset != "desk")
        throw std::runtime_error("unknown gen-data preset '" + a.preset + "' (only 'desk' exists)");
    json cfg_json = {{"n_base", a.cfg.n_base},        {"severities", a.cfg.severities},
                     {"n_points", a.cfg.n_points},    {"subjects", a.cfg.subjects},
                     {"bias_std", a.cfg.bias_std},    {"noise_std", a.cfg.noise_std},
                     {"train_fraction", a.cfg.train_fraction}, {"seed", a.cfg.seed}};
    write_run_header(a.out, "gen-data", argv, cfg_json);
    const pcqa::DatasetManifest m = pcqa::build_dataset(a.cfg, a.out);
    std::size_t n_train = 0;
    for (const auto& r : m.records) n_train += r.split == "train";
    std::cout << "wrote " << m.records.size() << " stimuli (" << n_train << " train, "
              << m.records.size() - n_train << " test) to " << a.out << "\n";
    return 0;
}

struct RenderArgs {
    std::string ply, out;
    int views = 4, height = 480, width = 480, splat = -1;
    std::uint64_t seed = 1;
    bool fixed = false;
};

int run_render(const RenderArgs& a, const std::vector<std::string>& argv) {
    json cfg = {{"views", a.views}, {"height", a.height}, {"width", a.width},
                {"seed", a.seed},   {"fixed", a.fixed},   {"splat_radius", a.splat}};
    write_run_header(a.out, "render", argv, cfg);
    const pcqa::PointCloud pc = pcqa::normalize_unit_cube(pcqa::load_ply(a.ply));
    pcqa::Rng rng(pcqa::mix_seed({a.seed, 0x7e4dULL}));
    const auto views = pcqa::render_views(pc, a.views, a.height, a.width, rng, a.fixed, a.splat);
    const int splat_used = a.splat >= 0 ? a.splat : pcqa::default_splat_radius(a.height, a.width);
    pcqa::dump_projections(views, a.out, splat_used);
    std::cout << "wrote " << views.size() << " views to " << a.out << "\n";
    return 0;
}

struct TrainArgs {
    std::string manifest, out, preset = "desk", config_file, resume;
    double alpha = -1.0; // <0: keep preset value
    bool no_stochastic = false, no_annealing = false, no_depth = false, fixed_viewpoint = false;
    std::int64_t seed = -1;
    int epochs = 0, stop_after = 0;
};

int run_train(const TrainArgs& a, const std::vector<std::string>& argv) {
    pcqa::TrainConfig cfg = pcqa::preset_by_name(a.preset);
    if (!a.config_file.empty()) cfg = pcqa::parse_config_file(a.config_file, cfg);
    if (a.alpha >= 0.0) cfg.alpha = a.alpha;
    if (a.no_stochastic) cfg.no_stochastic = true;
    if (a.no_annealing) cfg.no_annealing = true;
    if (a.no_depth) cfg.no_depth = true;
    if (a.fixed_viewpoint) cfg.fixed_viewpoint = true;
    if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
    if (a.epochs > 0) cfg.epochs = a.epochs;
    cfg.validate();

    pcqa::Checkpoint resume_ckpt;
    const bool resuming = !a.resume.empty();
    if (resuming) {
        resume_ckpt = pcqa::load_checkpoint(a.resume);
        cfg = pcqa::config_from_checkpoint(resume_ckpt);
    }

    write_run_header(a.out, "train", argv, json::parse(pcqa::train_config_to_json(cfg)));
    const fs::path manifest_path(a.manifest);
    const pcqa::DatasetManifest manifest = pcqa::read_manifest(manifest_path);
    std::ofstream log(fs::path(a.out) / "train_log.jsonl", std::ios::binary);

    const pcqa::TrainResult res = pcqa::train(manifest, manifest_path.parent_path(), cfg,
                                              resuming ? &resume_ckpt : nullptr, a.stop_after, &log);
    if (res.divergence.diverged) {
        std::cerr << "training diverged at epoch " << res.divergence.epoch << ", step "
                  << res.divergence.step << ", sample '" << res.divergence.sample_id << "': "
                  << res.divergence.detail << "\n";
        return kExitDivergence;
    }
    const pcqa::Checkpoint ckpt = pcqa::to_checkpoint(*res.model, res.adam, cfg, res.completed_epochs);
    pcqa::save_checkpoint(ckpt, fs::path(a.out) / "checkpoint.bin");
    std::cout << "trained " << res.completed_epochs << " epochs; checkpoint written to " << a.out
              << "/checkpoint.bin\n";
    return 0;
}

struct ScoreArgs {
    std::string checkpoint, ply, manifest, out, mode = "late", split = "test";
    int samples = 37;
    std::uint64_t seed = 1;
    bool dump_ratings = false;
    double mos_min = 0.0, mos_max = 1.0; // used only without a manifest
};

int run_score(const ScoreArgs& a, const std::vector<std::string>& argv) {
    const pcqa::Checkpoint ckpt = pcqa::load_checkpoint(a.checkpoint);
    const pcqa::RestoredModel rm = pcqa::restore_model(ckpt);
    json cfg = {{"checkpoint", a.checkpoint}, {"samples", a.samples}, {"mode", a.mode},
                {"seed", a.seed},             {"split", a.split}};
    write_run_header(a.out, "score", argv, cfg);
    const pcqa::AverageMode mode = pcqa::average_mode_from_string(a.mode);

    std::vector<ScoreRow> rows;
    double mos_min = a.mos_min, mos_max = a.mos_max;
    if (!a.manifest.empty()) {
        const fs::path manifest_path(a.manifest);
        const pcqa::DatasetManifest m = pcqa::read_manifest(manifest_path);
        mos_min = m.mos_min;
        mos_max = m.mos_max;
        auto records = a.split == "all" ? std::vector<const pcqa::ManifestRecord*>() : m.split(a.split);
        if (a.split == "all")
            for (const auto& r : m.records) records.push_back(&r);
        if (records.empty()) throw pcqa::ManifestError("no records in split '" + a.split + "'");
        rows = score_records(rm, records, manifest_path.parent_path(), a.samples, mode, a.seed, mos_min,
                             mos_max);
    } else {
        const pcqa::PointCloud pc = pcqa::load_ply(a.ply);
        ScoreRow row;
        row.id = fs::path(a.ply).stem().string();
        row.pred = pcqa::predict(rm, pc, a.samples, mode,
                                 pcqa::mix_seed({a.seed, pcqa::fnv1a_str(row.id)}), mos_min, mos_max);
        rows.push_back(std::move(row));
    }

    write_predictions_csv(rows, fs::path(a.out) / "predictions.csv");
    if (a.dump_ratings) write_ratings_dump(rows, a.out, mos_min, mos_max);
    std::cout << "scored " << rows.size() << " stimuli (" << a.mode << " average, t=" << a.samples
              << ") into " << a.out << "/predictions.csv\n";
    return 0;
}

struct EvalArgs {
    std::string predictions, manifest, out;
};

int run_eval(const EvalArgs& a, const std::vector<std::string>& argv) {
    write_run_header(a.out, "eval", argv,
                     json{{"predictions", a.predictions}, {"manifest", a.manifest}});
    const pcqa::DatasetManifest m = pcqa::read_manifest(a.manifest);
    std::unordered_map<std::string, double> mos_by_id;
    for (const auto& r : m.records) mos_by_id[r.id] = r.mos;

    std::ifstream in(a.predictions);
    if (!in) throw std::runtime_error("cannot open predictions '" + a.predictions + "'");
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty predictions file");

    // Locate id/final columns by name.
    int id_col = -1, final_col = -1, col = 0;
    {
        std::stringstream hs(header);
        std::string name;
        while (std::getline(hs, name, ',')) {
            if (name == "id") id_col = col;
            if (name == "final") final_col = col;
            ++col;
        }
    }
    if (id_col < 0 || final_col < 0)
        throw std::runtime_error("predictions file needs 'id' and 'final' columns");

    std::vector<double> pred, mos;
    std::vector<std::string> unknown, duplicates;
    std::unordered_map<std::string, bool> seen;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string field, id;
        double final_v = 0.0;
        for (int c = 0; std::getline(ls, field, ','); ++c) {
            if (c == id_col) id = field;
            if (c == final_col) final_v = std::stod(field);
        }
        if (seen.count(id)) {
            duplicates.push_back(id);
            continue;
        }
        seen[id] = true;
        auto it = mos_by_id.find(id);
        if (it == mos_by_id.end()) {
            unknown.push_back(id);
            continue;
        }
        pred.push_back(final_v);
        mos.push_back(it->second);
    }
    if (!unknown.empty() || !duplicates.empty()) {
        std::string msg = "prediction/manifest id mismatch:";
        for (const auto& u : unknown) msg += " unknown:" + u;
        for (const auto& d : duplicates) msg += " duplicate:" + d;
        throw std::runtime_error(msg);
    }

    const pcqa::MetricReport rep = pcqa::report(pred, mos);
    write_metric_report(rep, a.out);
    print_metric_report(rep, std::cout);
    return 0;
}

struct AblateArgs {
    std::string manifest, out, preset = "desk";
    int samples = 37;
    int jobs = default_jobs();
    std::uint64_t seed = 1;
};

struct AblateRow {
    std::string cell;
    std::string status; // "ok" | "diverged"
    pcqa::MetricReport rep;
    std::string detail;
};

int run_ablate(const AblateArgs& a, const std::vector<std::string>& argv) {
    write_run_header(a.out, "ablate", argv,
                     json{{"preset", a.preset}, {"samples", a.samples}, {"jobs", a.jobs}, {"seed", a.seed}});
    const fs::path manifest_path(a.manifest);
    const pcqa::DatasetManifest manifest = pcqa::read_manifest(manifest_path);
    const fs::path data_root = manifest_path.parent_path();
    const pcqa::TrainConfig base = pcqa::preset_by_name(a.preset);

    struct Cell {
        std::string name;
        std::function<void(pcqa::TrainConfig&)> tweak;
    };
    const std::vector<Cell> cells = {
        {"full", [](pcqa::TrainConfig&) {}},
        {"no_stochastic", [](pcqa::TrainConfig& c) { c.no_stochastic = true; }},
        {"no_annealing", [](pcqa::TrainConfig& c) { c.no_annealing = true; }},
        {"alpha_0.2", [](pcqa::TrainConfig& c) { c.alpha = 0.2; }},
        {"alpha_0.6", [](pcqa::TrainConfig& c) { c.alpha = 0.6; }},
        {"no_depth", [](pcqa::TrainConfig& c) { c.no_depth = true; }},
        {"fixed_viewpoint", [](pcqa::TrainConfig& c) { c.fixed_viewpoint = true; }},
    };

    std::vector<AblateRow> rows(cells.size() + 1); // + early_average row
    auto run_cell = [&](std::size_t i) {
        const Cell& cell = cells[i];
        AblateRow& row = rows[i];
        row.cell = cell.name;
        pcqa::TrainConfig cfg = base;
        cfg.seed = a.seed;
        cell.tweak(cfg);
        const fs::path cell_dir = fs::path(a.out) / cell.name;
        fs::create_directories(cell_dir);
        std::ofstream log(cell_dir / "train_log.jsonl", std::ios::binary);

        const pcqa::TrainResult res = pcqa::train(manifest, data_root, cfg, nullptr, 0, &log);
        if (res.divergence.diverged) {
            row.status = "diverged";
            row.detail = "epoch " + std::to_string(res.divergence.epoch) + " sample " +
                         res.divergence.sample_id;
            return;
        }
        const pcqa::Checkpoint ckpt =
            pcqa::to_checkpoint(*res.model, res.adam, cfg, res.completed_epochs);
        pcqa::save_checkpoint(ckpt, cell_dir / "checkpoint.bin");

        const pcqa::RestoredModel rm{cfg, res.model};
        auto score_and_report = [&](pcqa::AverageMode mode, const fs::path& dir, AblateRow& target) {
            fs::create_directories(dir);
            const auto rows_scored = score_records(rm, manifest.split("test"), data_root, a.samples, mode,
                                                   a.seed, manifest.mos_min, manifest.mos_max);
            write_predictions_csv(rows_scored, dir / "predictions.csv");
            std::vector<double> pred, mos;
            for (const auto& r : rows_scored) {
                pred.push_back(r.pred.final_score);
                mos.push_back(r.mos);
            }
            target.rep = pcqa::report(pred, mos);
            write_metric_report(target.rep, dir);
            target.status = "ok";
        };
        score_and_report(pcqa::AverageMode::late, cell_dir, row);
        if (cell.name == "full") {
            AblateRow& early = rows.back();
            early.cell = "early_average";
            score_and_report(pcqa::AverageMode::early, fs::path(a.out) / "early_average", early);
        }
    };

    if (a.jobs <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int n_threads = std::min<int>(a.jobs, static_cast<int>(cells.size()));
        for (int w = 0; w < n_threads; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= cells.size()) return;
                    run_cell(i);
                }
            });
        for (auto& th : pool) th.join();
    }

    std::ofstream csv(fs::path(a.out) / "ablation.csv", std::ios::binary);
    csv << "cell,status,srcc,plcc,krcc,rmse,detail\n";
    for (const auto& row : rows) {
        csv << row.cell << "," << row.status;
        if (row.status == "ok")
            csv << "," << fmt(row.rep.srcc) << "," << fmt(row.rep.plcc) << "," << fmt(row.rep.krcc) << ","
                << fmt(row.rep.rmse) << ",";
        else
            csv << ",,,,," << row.detail;
        csv << "\n";
    }
    std::cout << "ablation grid finished; results in " << a.out << "/ablation.csv\n";
    for (const auto& row : rows)
        std::cout << "  " << std::left << std::setw(18) << row.cell << row.status
                  << (row.status == "ok" ? "  srcc=" + fmt(row.rep.srcc) : "  " + row.detail) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic no-reference point cloud quality assessment toolkit"};
    app.require_subcommand(1);
    std::vector<std::string> argv_vec(argv, argv + argc);

    GenDataArgs gen;
    auto* cg = app.add_subcommand("gen-data", "Generate a synthetic rated dataset");
    cg->add_option("--out", gen.out, "Output directory")->required();
    cg->add_option("--preset", gen.preset, "Generation preset (desk); flags override it");
    cg->add_option("--n-base", gen.cfg.n_base, "Base stimuli (shapes cycle)");
    cg->add_option("--severities", gen.cfg.severities, "Severity levels per kind");
    cg->add_option("--n-points", gen.cfg.n_points, "Points per stimulus");
    cg->add_option("--subjects", gen.cfg.subjects, "Simulated subjects per stimulus");
    cg->add_option("--bias-std", gen.cfg.bias_std, "Per-subject bias std");
    cg->add_option("--noise-std", gen.cfg.noise_std, "Per-judgment noise std");
    cg->add_option("--train-frac", gen.cfg.train_fraction, "Train split fraction");
    cg->add_option("--seed", gen.cfg.seed, "Master seed");

    RenderArgs ren;
    auto* cr = app.add_subcommand("render", "Dump RGB-D projections of a point cloud");
    cr->add_option("--ply", ren.ply, "Input PLY file")->required();
    cr->add_option("--out", ren.out, "Output directory")->required();
    cr->add_option("--views", ren.views, "Number of views");
    cr->add_option("--height", ren.height, "Image height");
    cr->add_option("--width", ren.width, "Image width");
    cr->add_option("--splat-radius", ren.splat, "Splat radius in pixels (-1 = auto)");
    cr->add_option("--seed", ren.seed, "Viewpoint seed");
    cr->add_flag("--fixed", ren.fixed, "Canonical axis-aligned viewpoints");

    TrainArgs tr;
    auto* ct = app.add_subcommand("train", "Train a quality model");
    ct->add_option("--manifest", tr.manifest, "Dataset manifest")->required();
    ct->add_option("--out", tr.out, "Output directory")->required();
    ct->add_option("--preset", tr.preset, "Config preset: desk|paper");
    ct->add_option("--config", tr.config_file, "key = value config file");
    ct->add_option("--alpha", tr.alpha, "Objective weighting factor");
    ct->add_flag("--no-stochastic", tr.no_stochastic, "Deterministic baseline (QRG only)");
    ct->add_flag("--no-annealing", tr.no_annealing, "Constant KL weight 1");
    ct->add_flag("--no-depth", tr.no_depth, "Zero the depth channel");
    ct->add_flag("--fixed-viewpoint", tr.fixed_viewpoint, "Canonical viewpoints instead of random");
    ct->add_option("--seed", tr.seed, "Training seed");
    ct->add_option("--epochs", tr.epochs, "Override epoch count");
    ct->add_option("--stop-after", tr.stop_after, "Stop after this epoch (for later resume)");
    ct->add_option("--resume", tr.resume, "Resume from checkpoint (config comes from it)");

    ScoreArgs sc;
    auto* cs = app.add_subcommand("score", "Predict quality for a PLY or a manifest split");
    cs->add_option("--checkpoint", sc.checkpoint, "Trained checkpoint")->required();
    auto* ply_opt = cs->add_option("--ply", sc.ply, "Single PLY to score");
    auto* man_opt = cs->add_option("--manifest", sc.manifest, "Manifest to score");
    ply_opt->excludes(man_opt);
    cs->add_option("--out", sc.out, "Output directory")->required();
    cs->add_option("--samples", sc.samples, "Latent draws per stimulus (T)");
    cs->add_option("--mode", sc.mode, "late|early rating average");
    cs->add_option("--split", sc.split, "Manifest split: train|test|all");
    cs->add_option("--seed", sc.seed, "Sampling seed");
    cs->add_option("--mos-min", sc.mos_min, "Reporting scale lower bound (no-manifest mode)");
    cs->add_option("--mos-max", sc.mos_max, "Reporting scale upper bound (no-manifest mode)");
    cs->add_flag("--dump-ratings", sc.dump_ratings, "Also write per-rating and histogram CSVs");

    EvalArgs ev;
    auto* ce = app.add_subcommand("eval", "Correlation metrics of predictions against a manifest");
    ce->add_option("--predictions", ev.predictions, "predictions.csv from `score`")->required();
    ce->add_option("--manifest", ev.manifest, "Dataset manifest")->required();
    ce->add_option("--out", ev.out, "Output directory")->required();

    AblateArgs ab;
    auto* ca = app.add_subcommand("ablate", "Run the ablation grid on one dataset");
    ca->add_option("--manifest", ab.manifest, "Dataset manifest")->required();
    ca->add_option("--out", ab.out, "Output directory")->required();
    ca->add_option("--preset", ab.preset, "Config preset: desk|paper");
    ca->add_option("--samples", ab.samples, "Latent draws per stimulus at scoring time");
    ca->add_option("--jobs", ab.jobs, "Concurrent grid cells (default $PCQA_THREADS or 1)");
    ca->add_option("--seed", ab.seed, "Seed for every cell");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (cg->parsed()) return run_gen_data(gen, argv_vec);
        if (cr->parsed()) return run_render(ren, argv_vec);
        if (ct->parsed()) return run_train(tr, argv_vec);
        if (cs->parsed()) {
            if (sc.ply.empty() && sc.manifest.empty()) {
                std::cerr << "score: need --ply or --manifest\n";
                return kExitUsage;
            }
            return run_score(sc, argv_vec);
        }
        if (ce->parsed()) return run_eval(ev, argv_vec);
        if (ca->parsed()) return run_ablate(ab, argv_vec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
