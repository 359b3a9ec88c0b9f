#include "refract/config.hpp"

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "refract/errors.hpp"

namespace refract {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key \"" + key + "\" in " + where);
}

double number_at(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError("missing key \"" + key + "\" in " + where);
    if (!j.at(key).is_number())
        throw ConfigError("key \"" + key + "\" in " + where + " must be a number");
    return j.at(key).get<double>();
}

std::vector<double> array_at(const json& j, const std::string& key,
                             const std::string& where) {
    if (!j.contains(key)) throw ConfigError("missing key \"" + key + "\" in " + where);
    const json& a = j.at(key);
    if (!a.is_array() || a.empty())
        throw ConfigError("key \"" + key + "\" in " + where +
                          " must be a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& v : a) {
        if (!v.is_number())
            throw ConfigError("key \"" + key + "\" in " + where +
                              " must be a non-empty array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

JumpSpec parse_jumps(const json& j) {
    if (!j.is_object()) throw ConfigError("\"jumps\" must be an object");
    if (!j.contains("type") || !j.at("type").is_string())
        throw ConfigError("\"jumps\" needs a string \"type\"");
    std::string type = j.at("type").get<std::string>();
    if (type == "none") {
        reject_unknown(j, {"type"}, "jumps");
        return NoJumps{};
    }
    if (type == "hyperexp") {
        reject_unknown(j, {"type", "lambda", "weights", "rates"}, "jumps");
        HyperExp h;
        h.lambda = number_at(j, "lambda", "jumps");
        h.weights = array_at(j, "weights", "jumps");
        h.rates = array_at(j, "rates", "jumps");
        return h;
    }
    if (type == "stable") {
        reject_unknown(j, {"type", "alpha"}, "jumps");
        return StableTail{number_at(j, "alpha", "jumps")};
    }
    throw ConfigError("jump type must be \"hyperexp\", \"stable\", or \"none\"");
}

}  // namespace

ModelConfig parse_model_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config root must be an object");
    reject_unknown(j, {"gamma", "c", "sigma", "jumps", "delta", "b"}, "config");
    if (j.contains("gamma") == j.contains("c"))
        throw ConfigError("config must set exactly one of \"gamma\" or \"c\"");
    if (!j.contains("jumps")) throw ConfigError("missing key \"jumps\" in config");

    double sigma = j.contains("sigma") ? number_at(j, "sigma", "config") : 0.0;
    JumpSpec jumps = parse_jumps(j.at("jumps"));

    auto build_model = [&]() -> LevyModel {
        if (j.contains("gamma"))
            return LevyModel::from_triplet(number_at(j, "gamma", "config"), sigma,
                                           std::move(jumps));
        double c = number_at(j, "c", "config");
        if (auto* h = std::get_if<HyperExp>(&jumps))
            return LevyModel::compound_poisson(c, std::move(*h), sigma);
        if (auto* s = std::get_if<StableTail>(&jumps))
            return LevyModel::stable_with_drift(c, s->alpha);
        return LevyModel::brownian(c, sigma);
    };
    try {
        ModelConfig cfg{build_model(),
                        {number_at(j, "delta", "config"), number_at(j, "b", "config")}};
        if (cfg.refraction.b < 0.0) throw ConfigError("threshold b must be nonnegative");
        validate_refraction(cfg.model, cfg.refraction);
        return cfg;
    } catch (const ModelError& e) {
        throw ConfigError(e.what());
    }
}

ModelConfig load_model_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_model_config(j);
}

nlohmann::json model_config_to_json(const ModelConfig& cfg) {
    json j;
    j["gamma"] = cfg.model.gamma();
    j["sigma"] = cfg.model.sigma();
    if (const auto* h = std::get_if<HyperExp>(&cfg.model.jumps())) {
        j["jumps"] = {{"type", "hyperexp"},
                      {"lambda", h->lambda},
                      {"weights", h->weights},
                      {"rates", h->rates}};
    } else if (const auto* s = std::get_if<StableTail>(&cfg.model.jumps())) {
        j["jumps"] = {{"type", "stable"}, {"alpha", s->alpha}};
    } else {
        j["jumps"] = {{"type", "none"}};
    }
    j["delta"] = cfg.refraction.delta;
    j["b"] = cfg.refraction.b;
    return j;
}

}  // namespace refract
