#include "pcqa/manifest.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

namespace pcqa {

using nlohmann::json;

std::vector<const ManifestRecord*> DatasetManifest::split(const std::string& tag) const {
    std::vector<const ManifestRecord*> out;
    for (const auto& r : records)
        if (r.split == tag) out.push_back(&r);
    return out;
}

namespace {

void validate(const DatasetManifest& m) {
    if (!(m.mos_min < m.mos_max)) throw ManifestError("manifest: mos_min must be < mos_max");
    std::unordered_set<std::string> ids;
    for (const auto& r : m.records) {
        if (r.id.empty()) throw ManifestError("manifest: empty record id");
        if (!ids.insert(r.id).second) throw ManifestError("manifest: duplicate id '" + r.id + "'");
        if (!(r.mos >= m.mos_min && r.mos <= m.mos_max))
            throw ManifestError("manifest: mos of '" + r.id + "' outside declared range");
        if (r.split != "train" && r.split != "test")
            throw ManifestError("manifest: unknown split '" + r.split + "' for '" + r.id + "'");
        if (!r.judgments.empty()) {
            double sum = 0.0;
            for (double j : r.judgments) sum += j;
            const double mean = sum / static_cast<double>(r.judgments.size());
            if (std::abs(mean - r.mos) > 1e-9)
                throw ManifestError("manifest: mos of '" + r.id + "' is not the mean of its judgments");
        }
    }
}

} // namespace

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ManifestError("cannot open manifest '" + path.string() + "'");

    DatasetManifest m;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ManifestError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!have_header) {
            if (j.value("type", "") != "pcqa_manifest")
                throw ManifestError("manifest line 1: missing pcqa_manifest header");
            m.mos_min = j.at("mos_min").get<double>();
            m.mos_max = j.at("mos_max").get<double>();
            m.config_hash = std::stoull(j.value("config_hash", "0"), nullptr, 16);
            have_header = true;
            continue;
        }
        ManifestRecord r;
        try {
            r.id = j.at("id").get<std::string>();
            r.path = j.at("path").get<std::string>();
            r.mos = j.at("mos").get<double>();
            r.split = j.at("split").get<std::string>();
            if (j.contains("judgments")) r.judgments = j.at("judgments").get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw ManifestError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        m.records.push_back(std::move(r));
    }
    if (!have_header) throw ManifestError("manifest '" + path.string() + "' is empty");
    validate(m);
    return m;
}

void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    validate(m);
    std::ofstream out(path, std::ios::binary); // binary: stable newlines
    if (!out) throw ManifestError("cannot write manifest '" + path.string() + "'");

    char hash_hex[17];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx", static_cast<unsigned long long>(m.config_hash));
    json header = {{"type", "pcqa_manifest"},
                   {"version", 1},
                   {"mos_min", m.mos_min},
                   {"mos_max", m.mos_max},
                   {"config_hash", hash_hex}};
    out << header.dump() << "\n";
    for (const auto& r : m.records) {
        json j = {{"id", r.id}, {"path", r.path}, {"mos", r.mos}, {"split", r.split}};
        if (!r.judgments.empty()) j["judgments"] = r.judgments;
        out << j.dump() << "\n";
    }
    if (!out) throw ManifestError("I/O failure writing manifest '" + path.string() + "'");
}

} // namespace pcqa
