#include <set>
#include <string>

#include "edgesr/error.hpp"
#include "edgesr/io.hpp"
#include "edgesr/simulator.hpp"
#include "json.hpp"

namespace edgesr {

namespace {

using json = nlohmann::json;

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
    std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!known.contains(key)) {
            fail(ErrorCode::ParseError, "scenario: unknown field '" + where + key + "'");
        }
    }
}

const json& require_object(const json& v, const std::string& path) {
    if (!v.is_object()) fail(ErrorCode::ParseError, "scenario: '" + path + "' must be an object");
    return v;
}

double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(ErrorCode::ParseError, "scenario: '" + path + "' must be a number");
    return v.get<double>();
}

int get_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) {
        fail(ErrorCode::ParseError, "scenario: '" + path + "' must be an integer");
    }
    return v.get<int>();
}

std::uint64_t get_u64(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        fail(ErrorCode::ParseError, "scenario: '" + path + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::vector<int> get_int_list(const json& v, const std::string& path) {
    if (!v.is_array()) fail(ErrorCode::ParseError, "scenario: '" + path + "' must be an array");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(get_int(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

Request parse_request(const json& v, const std::string& path) {
    require_object(v, path);
    reject_unknown(v, path + ".", {"id", "target_resolution", "lambda", "prompt_seed",
                                   "latency_budget"});
    Request r;
    for (const char* key : {"id", "target_resolution", "lambda"}) {
        if (!v.contains(key)) {
            fail(ErrorCode::ParseError, "scenario: missing field '" + path + "." + key + "'");
        }
    }
    if (!v["id"].is_string()) fail(ErrorCode::ParseError, "scenario: '" + path + ".id' must be a string");
    r.id = v["id"].get<std::string>();
    r.target_resolution = get_int(v["target_resolution"], path + ".target_resolution");
    r.lambda = get_number(v["lambda"], path + ".lambda");
    if (v.contains("prompt_seed")) r.prompt_seed = get_u64(v["prompt_seed"], path + ".prompt_seed");
    if (v.contains("latency_budget") && !v["latency_budget"].is_null()) {
        r.latency_budget = get_number(v["latency_budget"], path + ".latency_budget");
    }
    return r;
}

SAParams parse_sa(const json& v) {
    require_object(v, "sa_params");
    reject_unknown(v, "sa_params.", {"initial_temperature", "min_temperature", "cooling",
                                     "iters_per_temp", "latency_budget", "rng_seed"});
    SAParams p;
    if (v.contains("initial_temperature")) {
        p.initial_temperature = get_number(v["initial_temperature"], "sa_params.initial_temperature");
    }
    if (v.contains("min_temperature")) {
        p.min_temperature = get_number(v["min_temperature"], "sa_params.min_temperature");
    }
    if (v.contains("cooling")) p.cooling = get_number(v["cooling"], "sa_params.cooling");
    if (v.contains("iters_per_temp")) {
        p.iters_per_temp = get_int(v["iters_per_temp"], "sa_params.iters_per_temp");
    }
    if (v.contains("latency_budget") && !v["latency_budget"].is_null()) {
        p.latency_budget = get_number(v["latency_budget"], "sa_params.latency_budget");
    }
    if (v.contains("rng_seed")) p.rng_seed = get_u64(v["rng_seed"], "sa_params.rng_seed");
    return p;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const SystemProfile& fallback_profile) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ParseError, std::string("scenario: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) fail(ErrorCode::ParseError, "scenario: top level must be an object");
    reject_unknown(doc, "", {"_comment", "requests", "profile", "candidate_sets", "gamma",
                             "policy", "sa_params", "capacity_scale", "round_seconds",
                             "execute_pixels", "grid_side", "overlap"});

    Scenario s;
    s.profile = fallback_profile;
    if (!doc.contains("requests")) fail(ErrorCode::ParseError, "scenario: missing field 'requests'");
    const json& reqs = doc["requests"];
    if (!reqs.is_array()) fail(ErrorCode::ParseError, "scenario: 'requests' must be an array");
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        s.requests.push_back(parse_request(reqs[i], "requests[" + std::to_string(i) + "]"));
    }
    if (doc.contains("profile")) {
        s.profile = parse_profile(require_object(doc["profile"], "profile").dump());
    }
    if (doc.contains("candidate_sets")) {
        const json& cs = require_object(doc["candidate_sets"], "candidate_sets");
        reject_unknown(cs, "candidate_sets.", {"scales", "steps"});
        auto scales = cs.contains("scales") ? get_int_list(cs["scales"], "candidate_sets.scales")
                                            : s.sets.scales();
        auto steps = cs.contains("steps") ? get_int_list(cs["steps"], "candidate_sets.steps")
                                          : s.sets.steps();
        try {
            s.sets = CandidateSets(std::move(scales), std::move(steps));
        } catch (const Error& e) {
            fail(ErrorCode::ParseError, std::string("scenario: candidate_sets: ") + e.what());
        }
    }
    if (doc.contains("gamma")) s.gamma = get_number(doc["gamma"], "gamma");
    if (doc.contains("policy")) {
        if (!doc["policy"].is_string()) fail(ErrorCode::ParseError, "scenario: 'policy' must be a string");
        s.policy = parse_policy(doc["policy"].get<std::string>());
    }
    if (doc.contains("sa_params")) s.sa_params = parse_sa(doc["sa_params"]);
    if (doc.contains("capacity_scale")) s.capacity_scale = get_number(doc["capacity_scale"], "capacity_scale");
    if (doc.contains("round_seconds")) s.round_seconds = get_number(doc["round_seconds"], "round_seconds");
    if (doc.contains("execute_pixels")) {
        if (!doc["execute_pixels"].is_boolean()) {
            fail(ErrorCode::ParseError, "scenario: 'execute_pixels' must be a boolean");
        }
        s.execute_pixels = doc["execute_pixels"].get<bool>();
    }
    if (doc.contains("grid_side")) s.grid_side = get_int(doc["grid_side"], "grid_side");
    if (doc.contains("overlap")) s.overlap = get_int(doc["overlap"], "overlap");

    try {
        s.validate();
    } catch (const Error& e) {
        fail(ErrorCode::ParseError, std::string("scenario: ") + e.what());
    }
    return s;
}

Scenario load_scenario(const std::string& path, const SystemProfile& fallback_profile) {
    return parse_scenario(read_file(path), fallback_profile);
}

std::string scenario_to_json(const Scenario& s) {
    json doc = json::object();
    json reqs = json::array();
    for (const auto& r : s.requests) {
        json o = {{"id", r.id},
                  {"target_resolution", r.target_resolution},
                  {"lambda", r.lambda},
                  {"prompt_seed", r.prompt_seed}};
        if (r.latency_budget) o["latency_budget"] = *r.latency_budget;
        reqs.push_back(std::move(o));
    }
    doc["requests"] = std::move(reqs);
    doc["profile"] = json::parse(profile_to_json(s.profile));
    doc["candidate_sets"] = {{"scales", s.sets.scales()}, {"steps", s.sets.steps()}};
    doc["gamma"] = s.gamma;
    doc["policy"] = std::string(to_string(s.policy));
    json sa = {{"initial_temperature", s.sa_params.initial_temperature},
               {"min_temperature", s.sa_params.min_temperature},
               {"cooling", s.sa_params.cooling},
               {"iters_per_temp", s.sa_params.iters_per_temp},
               {"rng_seed", s.sa_params.rng_seed}};
    if (s.sa_params.latency_budget) sa["latency_budget"] = *s.sa_params.latency_budget;
    doc["sa_params"] = std::move(sa);
    doc["capacity_scale"] = s.capacity_scale;
    doc["round_seconds"] = s.round_seconds;
    doc["execute_pixels"] = s.execute_pixels;
    doc["grid_side"] = s.grid_side;
    doc["overlap"] = s.overlap;
    return doc.dump(2) + "\n";
}

}  // namespace edgesr
