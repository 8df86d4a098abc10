#include "pcqa/config_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pcqa {

using nlohmann::json;

namespace {

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoi(item));
    }
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw std::invalid_argument("expected boolean, got '" + s + "'");
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

void apply_config_line(TrainConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "lr") cfg.lr = std::stod(value);
    else if (key == "beta1") cfg.beta1 = std::stod(value);
    else if (key == "beta2") cfg.beta2 = std::stod(value);
    else if (key == "epochs") cfg.epochs = std::stoi(value);
    else if (key == "batch") cfg.batch = std::stoi(value);
    else if (key == "alpha") cfg.alpha = std::stod(value);
    else if (key == "num_views") cfg.num_views = std::stoi(value);
    else if (key == "height") cfg.height = std::stoi(value);
    else if (key == "width") cfg.width = std::stoi(value);
    else if (key == "latent_dim") cfg.latent_dim = std::stoi(value);
    else if (key == "fusion_channels") cfg.fusion_channels = std::stoi(value);
    else if (key == "encoder_channels") cfg.encoder_channels = parse_int_list(value);
    else if (key == "encoder_fc_hidden") cfg.encoder_fc_hidden = std::stoi(value);
    else if (key == "stage_channels") cfg.stage_channels = parse_int_list(value);
    else if (key == "blocks_per_stage") cfg.blocks_per_stage = std::stoi(value);
    else if (key == "splat_radius") cfg.splat_radius = std::stoi(value);
    else if (key == "grad_clip") cfg.grad_clip = std::stod(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "no_stochastic") cfg.no_stochastic = parse_bool(value);
    else if (key == "no_annealing") cfg.no_annealing = parse_bool(value);
    else if (key == "no_depth") cfg.no_depth = parse_bool(value);
    else if (key == "fixed_viewpoint") cfg.fixed_viewpoint = parse_bool(value);
    else if (key == "render_once") cfg.render_once = parse_bool(value);
    else throw std::invalid_argument("unknown config key '" + key + "'");
}

TrainConfig parse_config_file(const std::filesystem::path& path, TrainConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            apply_config_line(base, key, value);
        } catch (const std::exception& e) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    base.validate();
    return base;
}

TrainConfig preset_by_name(const std::string& name) {
    if (name == "desk") return desk_preset();
    if (name == "paper") return paper_preset();
    throw ConfigError("unknown preset '" + name + "' (expected 'desk' or 'paper')");
}

std::string train_config_to_json(const TrainConfig& c) {
    json j;
    j["lr"] = c.lr;
    j["beta1"] = c.beta1;
    j["beta2"] = c.beta2;
    j["epochs"] = c.epochs;
    j["batch"] = c.batch;
    j["alpha"] = c.alpha;
    j["num_views"] = c.num_views;
    j["height"] = c.height;
    j["width"] = c.width;
    j["latent_dim"] = c.latent_dim;
    j["fusion_channels"] = c.fusion_channels;
    j["encoder_channels"] = c.encoder_channels;
    j["encoder_fc_hidden"] = c.encoder_fc_hidden;
    j["stage_channels"] = c.stage_channels;
    j["blocks_per_stage"] = c.blocks_per_stage;
    j["splat_radius"] = c.splat_radius;
    j["grad_clip"] = c.grad_clip;
    j["seed"] = c.seed;
    j["no_stochastic"] = c.no_stochastic;
    j["no_annealing"] = c.no_annealing;
    j["no_depth"] = c.no_depth;
    j["fixed_viewpoint"] = c.fixed_viewpoint;
    j["render_once"] = c.render_once;
    return j.dump();
}

TrainConfig train_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config JSON: ") + e.what());
    }
    TrainConfig c;
    c.lr = j.at("lr").get<double>();
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.epochs = j.at("epochs").get<int>();
    c.batch = j.at("batch").get<int>();
    c.alpha = j.at("alpha").get<double>();
    c.num_views = j.at("num_views").get<int>();
    c.height = j.at("height").get<int>();
    c.width = j.at("width").get<int>();
    c.latent_dim = j.at("latent_dim").get<int>();
    c.fusion_channels = j.at("fusion_channels").get<int>();
    c.encoder_channels = j.at("encoder_channels").get<std::vector<int>>();
    c.encoder_fc_hidden = j.at("encoder_fc_hidden").get<int>();
    c.stage_channels = j.at("stage_channels").get<std::vector<int>>();
    c.blocks_per_stage = j.at("blocks_per_stage").get<int>();
    c.splat_radius = j.at("splat_radius").get<int>();
    c.grad_clip = j.at("grad_clip").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.no_stochastic = j.at("no_stochastic").get<bool>();
    c.no_annealing = j.at("no_annealing").get<bool>();
    c.no_depth = j.at("no_depth").get<bool>();
    c.fixed_viewpoint = j.at("fixed_viewpoint").get<bool>();
    c.render_once = j.value("render_once", false);
    c.validate();
    return c;
}

} // namespace pcqa
