#include "pcqa/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "pcqa/ply.hpp"
#include "pcqa/rng.hpp"

namespace pcqa {

namespace {

constexpr BaseShape kShapes[4] = {BaseShape::sphere, BaseShape::cube, BaseShape::torus,
                                  BaseShape::gaussian_blob};
constexpr DistortionKind kKinds[4] = {DistortionKind::geometry_noise, DistortionKind::downsample,
                                      DistortionKind::color_quantize, DistortionKind::compound};

} // namespace

std::uint64_t gen_config_hash(const GenConfig& c) {
    char buf[256];
    const int n = std::snprintf(buf, sizeof buf, "v1|%d|%d|%zu|%d|%.17g|%.17g|%.17g|%llu", c.n_base,
                                c.severities, c.n_points, c.subjects, c.bias_std, c.noise_std,
                                c.train_fraction, static_cast<unsigned long long>(c.seed));
    return fnv1a(buf, static_cast<std::size_t>(n));
}

DatasetManifest build_dataset(const GenConfig& cfg, const std::filesystem::path& out_dir) {
    if (cfg.n_base < 1 || cfg.severities < 1) throw std::invalid_argument("build_dataset: empty grid");
    if (cfg.train_fraction < 0.0 || cfg.train_fraction > 1.0)
        throw std::invalid_argument("build_dataset: train_fraction outside [0, 1]");
    std::filesystem::create_directories(out_dir);

    DatasetManifest m;
    m.mos_min = 0.0;
    m.mos_max = 1.0;
    m.config_hash = gen_config_hash(cfg);

    for (int b = 0; b < cfg.n_base; ++b) {
        const BaseShape shape = kShapes[b % 4];
        for (const DistortionKind kind : kKinds) {
            for (int s = 0; s < cfg.severities; ++s) {
                const double severity =
                    cfg.severities == 1 ? 0.0 : static_cast<double>(s) / (cfg.severities - 1);
                char id[96];
                std::snprintf(id, sizeof id, "%s%02d_%s_s%d", to_string(shape), b, to_string(kind), s);

                DistortionSpec spec;
                spec.kind = kind;
                spec.severity = severity;
                spec.seed = mix_seed({cfg.seed, fnv1a(id, std::string(id).size()), 0xd15ULL});

                Stimulus st = gen_stimulus(shape, cfg.n_points, spec,
                                           mix_seed({cfg.seed, static_cast<std::uint64_t>(b)}));
                st.id = id;

                const JudgmentSet js = simulate_judgments(
                    st.true_quality, static_cast<std::size_t>(cfg.subjects), cfg.bias_std, cfg.noise_std,
                    mix_seed({cfg.seed, fnv1a(id, std::string(id).size()), 0x10dULL}));

                const std::string ply_name = std::string(id) + ".ply";
                save_ply(st.cloud, out_dir / ply_name, /*binary=*/true);

                ManifestRecord rec;
                rec.id = id;
                rec.path = ply_name;
                rec.mos = js.mos;
                rec.judgments = js.judgments;
                rec.split = "train"; // assigned below
                m.records.push_back(std::move(rec));
            }
        }
    }

    // Split by stimulus id: seeded shuffle, then the first round(f*N) go to
    // train. Exact counts, disjoint by construction.
    std::vector<std::size_t> order(m.records.size());
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(mix_seed({cfg.seed, 0x5b117ULL}));
    shuffle(order, split_rng);
    const auto n_train =
        static_cast<std::size_t>(std::lround(cfg.train_fraction * static_cast<double>(order.size())));
    for (std::size_t i = 0; i < order.size(); ++i)
        m.records[order[i]].split = i < n_train ? "train" : "test";

    write_manifest(m, out_dir / "manifest.jsonl");
    return m;
}

} // namespace pcqa
