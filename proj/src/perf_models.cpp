#include "edgesr/perf_models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "edgesr/error.hpp"

namespace edgesr {

namespace {

using json = nlohmann::json;

struct FieldRef {
    const char* name;
    double SystemProfile::*member;
};

constexpr FieldRef kFields[] = {
    {"edge_capacity", &SystemProfile::edge_capacity},
    {"device_capacity", &SystemProfile::device_capacity},
    {"bandwidth", &SystemProfile::bandwidth},
    {"gen_load_coeff", &SystemProfile::gen_load_coeff},
    {"gen_res_exponent", &SystemProfile::gen_res_exponent},
    {"sr_edge_coeff", &SystemProfile::sr_edge_coeff},
    {"sr_device_coeff", &SystemProfile::sr_device_coeff},
    {"sr_res_exponent", &SystemProfile::sr_res_exponent},
    {"sr_gamma_exponent", &SystemProfile::sr_gamma_exponent},
    {"bits_per_pixel", &SystemProfile::bits_per_pixel},
    {"quality_step_rate", &SystemProfile::quality_step_rate},
    {"quality_peak_resolution", &SystemProfile::quality_peak_resolution},
    {"quality_res_width", &SystemProfile::quality_res_width},
    {"quality_max", &SystemProfile::quality_max},
    {"enhance_max_ratio", &SystemProfile::enhance_max_ratio},
    {"enhance_exponent", &SystemProfile::enhance_exponent},
};

// Keys allowed in a profile file besides the fields.
constexpr const char* kCommentKey = "_comment";

double normalized(int resolution) { return static_cast<double>(resolution) / 1000.0; }

// gamma^p with 0^p == 0, so a branch with no patches carries no load.
double branch_share(double fraction, double exponent) {
    if (fraction <= 0.0) return 0.0;
    return std::pow(fraction, exponent);
}

}  // namespace

void SystemProfile::validate() const {
    for (const auto& f : kFields) {
        const double v = this->*f.member;
        if (!std::isfinite(v) || v <= 0.0) {
            fail(ErrorCode::InvalidArgument,
                 std::string("profile field '") + f.name + "' must be finite and > 0");
        }
    }
    if (enhance_max_ratio < 1.0) {
        fail(ErrorCode::InvalidArgument, "profile field 'enhance_max_ratio' must be >= 1");
    }
    if (quality_max > 1.0) {
        fail(ErrorCode::InvalidArgument, "profile field 'quality_max' must be <= 1");
    }
}

SystemProfile SystemProfile::with_edge_scale(double ratio) const {
    if (!(ratio > 0.0)) fail(ErrorCode::InvalidArgument, "capacity ratio must be > 0");
    SystemProfile scaled = *this;
    scaled.edge_capacity *= ratio;
    return scaled;
}

SystemProfile default_profile() {
    // Keep in sync with profiles/default.json (checked by test_perf_models).
    SystemProfile p;
    p.edge_capacity = 34100.0;
    p.device_capacity = 10600.0;
    p.bandwidth = 10.0;
    p.gen_load_coeff = 2000.0;
    p.gen_res_exponent = 2.5;
    p.sr_res_exponent = 1.0;
    p.sr_gamma_exponent = 1.6;
    // Full 512 px input: 125.4 s diffusion SR on the edge, 8.41 s learning SR on
    // the device. coeff = seconds * capacity / 0.512^sr_res_exponent.
    p.sr_edge_coeff = 8351835.9375;
    p.sr_device_coeff = 174113.28125;
    p.bits_per_pixel = 2.0;
    p.quality_step_rate = 0.15;
    p.quality_peak_resolution = 768.0;
    p.quality_res_width = 0.5;
    p.quality_max = 0.95;
    p.enhance_max_ratio = 1.5;
    p.enhance_exponent = 0.5;
    return p;
}

std::vector<std::string> profile_field_names() {
    std::vector<std::string> names;
    for (const auto& f : kFields) names.emplace_back(f.name);
    return names;
}

double load_gen(int steps, int resolution, const SystemProfile& profile) {
    return profile.gen_load_coeff * steps *
           std::pow(normalized(resolution), profile.gen_res_exponent);
}

double load_sr_edge(int resolution, const AllocationRatio& gamma, const SystemProfile& profile) {
    return profile.sr_edge_coeff * branch_share(gamma.value(), profile.sr_gamma_exponent) *
           std::pow(normalized(resolution), profile.sr_res_exponent);
}

double load_sr_device(int resolution, const AllocationRatio& gamma,
                      const SystemProfile& profile) {
    return profile.sr_device_coeff *
           branch_share(1.0 - gamma.value(), profile.sr_gamma_exponent) *
           std::pow(normalized(resolution), profile.sr_res_exponent);
}

double latency_inference(int steps, int resolution, const SystemProfile& profile) {
    return load_gen(steps, resolution, profile) / profile.edge_capacity;
}

SrLatency latency_sr(int resolution, const AllocationRatio& gamma, const SystemProfile& profile) {
    return {load_sr_edge(resolution, gamma, profile) / profile.edge_capacity,
            load_sr_device(resolution, gamma, profile) / profile.device_capacity};
}

double data_volume(int resolution, double fraction, const SystemProfile& profile) {
    const double pixels = static_cast<double>(resolution) * static_cast<double>(resolution);
    return fraction * profile.bits_per_pixel * pixels / 1e6;
}

TxLatency latency_transmission(int target_resolution, int initial_resolution,
                               const AllocationRatio& gamma, const SystemProfile& profile) {
    return {data_volume(target_resolution, gamma.value(), profile) / profile.bandwidth,
            data_volume(initial_resolution, 1.0 - gamma.value(), profile) / profile.bandwidth};
}

LatencyBreakdown latency_total(const Request& request, const Configuration& config,
                               const AllocationRatio& gamma, const SystemProfile& profile) {
    const int r = initial_resolution(request.target_resolution, config.sr_scale);
    LatencyBreakdown b;
    b.t_gen = latency_inference(config.denoise_steps, r, profile);
    const auto sr = latency_sr(r, gamma, profile);
    b.t_sr_edge = sr.edge;
    b.t_sr_device = sr.device;
    const auto tx = latency_transmission(request.target_resolution, r, gamma, profile);
    b.t_tx_enhanced = tx.enhanced;
    b.t_tx_raw = tx.raw;
    b.t_enhance = std::max(b.t_sr_edge + b.t_tx_enhanced, b.t_sr_device + b.t_tx_raw);
    b.total = b.t_gen + b.t_enhance;
    return b;
}

double quality_base(int steps, int resolution, const SystemProfile& profile) {
    const double step_term = 1.0 - std::exp(-profile.quality_step_rate * steps);
    const double log_ratio =
        std::log(static_cast<double>(resolution) / profile.quality_peak_resolution);
    const double width = profile.quality_res_width;
    const double res_term = std::exp(-(log_ratio * log_ratio) / (2.0 * width * width));
    return profile.quality_max * step_term * res_term;
}

double quality_multiplier(const AllocationRatio& gamma, const SystemProfile& profile) {
    return 1.0 + (profile.enhance_max_ratio - 1.0) *
                     branch_share(gamma.value(), profile.enhance_exponent);
}

double quality_final(const Request& request, const Configuration& config,
                     const AllocationRatio& gamma, const SystemProfile& profile) {
    const int r = initial_resolution(request.target_resolution, config.sr_scale);
    const double q = quality_base(config.denoise_steps, r, profile) *
                     quality_multiplier(gamma, profile);
    return std::min(q, 1.0);
}

SystemProfile parse_profile(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ParseError, std::string("profile: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) fail(ErrorCode::ParseError, "profile: top level must be an object");

    std::set<std::string> known;
    for (const auto& f : kFields) known.insert(f.name);
    for (const auto& [key, _] : doc.items()) {
        if (key != kCommentKey && !known.contains(key)) {
            fail(ErrorCode::ParseError, "profile: unknown field '" + key + "'");
        }
    }

    SystemProfile p;
    for (const auto& f : kFields) {
        auto it = doc.find(f.name);
        if (it == doc.end()) {
            fail(ErrorCode::ParseError, std::string("profile: missing field '") + f.name + "'");
        }
        if (!it->is_number()) {
            fail(ErrorCode::ParseError, std::string("profile: field '") + f.name +
                                            "' must be a number");
        }
        p.*f.member = it->get<double>();
    }
    try {
        p.validate();
    } catch (const Error& e) {
        fail(ErrorCode::ParseError, std::string("profile: ") + e.what());
    }
    return p;
}

SystemProfile load_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::FileNotFound, "cannot open profile '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_profile(ss.str());
}

std::string profile_to_json(const SystemProfile& profile) {
    json doc = json::object();
    for (const auto& f : kFields) doc[f.name] = profile.*f.member;
    return doc.dump(2) + "\n";
}

GenLoadFit fit_profile(const std::vector<TimingSample>& samples, double edge_capacity) {
    std::set<int> resolutions;
    for (const auto& s : samples) {
        if (s.steps <= 0 || s.resolution <= 0 || !(s.seconds > 0.0)) {
            fail(ErrorCode::DegenerateSamples, "timing samples must be strictly positive");
        }
        resolutions.insert(s.resolution);
    }
    if (samples.size() < 3 || resolutions.size() < 3) {
        fail(ErrorCode::DegenerateSamples,
             "calibration needs at least 3 samples at distinct resolutions");
    }
    if (!(edge_capacity > 0.0)) fail(ErrorCode::InvalidArgument, "edge capacity must be > 0");

    // y = log(load / steps) = log(coeff) + exponent * log(R / 1000)
    const double n = static_cast<double>(samples.size());
    double sx = 0, sy = 0;
    std::vector<double> xs, ys;
    for (const auto& s : samples) {
        const double x = std::log(normalized(s.resolution));
        const double y = std::log(s.seconds * edge_capacity / s.steps);
        xs.push_back(x);
        ys.push_back(y);
        sx += x;
        sy += y;
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    GenLoadFit fit;
    fit.exponent = sxy / sxx;
    const double intercept = my - fit.exponent * mx;
    fit.coeff = std::exp(intercept);
    double rss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (intercept + fit.exponent * xs[i]);
        rss += r * r;
    }
    fit.residual_norm = std::sqrt(rss);
    return fit;
}

std::vector<TimingSample> parse_timing_samples(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::ParseError, "samples: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "steps,resolution,seconds") {
        fail(ErrorCode::ParseError, "samples: expected header 'steps,resolution,seconds'");
    }
    std::vector<TimingSample> samples;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b, c, extra;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') ||
            !std::getline(row, c, ',') || std::getline(row, extra, ',')) {
            fail(ErrorCode::ParseError,
                 "samples: line " + std::to_string(line_no) + " must have 3 columns");
        }
        try {
            std::size_t pa = 0, pb = 0, pc = 0;
            TimingSample s{std::stoi(a, &pa), std::stoi(b, &pb), std::stod(c, &pc)};
            if (pa != a.size() || pb != b.size() || pc != c.size()) throw std::invalid_argument("");
            samples.push_back(s);
        } catch (const std::logic_error&) {
            fail(ErrorCode::ParseError,
                 "samples: line " + std::to_string(line_no) + " has a non-numeric value");
        }
    }
    return samples;
}

}  // namespace edgesr
