#include "edgesr/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "edgesr/io.hpp"
#include "edgesr/partitioner.hpp"
#include "edgesr/stitcher.hpp"
#include "json.hpp"

namespace edgesr {

namespace fs = std::filesystem;
using json = nlohmann::json;

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NoFeasibleConfiguration: return kExitInfeasible;
        case ErrorCode::IoError: return kExitIo;
        default: return kExitInput;
    }
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + '"';
}

}  // namespace

std::string schedule_csv(const ScenarioReport& report) {
    std::ostringstream out;
    out << kScheduleHeader << '\n';
    for (const auto& r : report.records) {
        out << csv_field(r.request_id) << ',' << to_string(r.policy) << ',';
        if (r.config) {
            out << r.config->sr_scale << ',' << r.config->denoise_steps;
        } else {
            out << ',';
        }
        out << ',' << format_number(r.utility) << ',' << csv_field(r.error.value_or("")) << '\n';
    }
    return out.str();
}

std::string trace_csv(const AnnealTrace& trace) {
    std::ostringstream out;
    out << kTraceHeader << '\n';
    for (const auto& m : trace.moves) {
        out << format_number(m.temperature) << ',' << m.iteration << ',' << m.candidate.sr_scale
            << ',' << m.candidate.denoise_steps << ','
            << (m.utility ? format_number(*m.utility) : std::string()) << ','
            << (m.accepted() ? "true" : "false") << ',' << to_string(m.outcome) << '\n';
    }
    return out.str();
}

std::string variance_csv(const PartitionResult& p) {
    std::ostringstream out;
    out << kVarianceHeader << '\n';
    for (int cell = 0; cell < static_cast<int>(p.variances.size()); ++cell) {
        out << cell << ',' << cell / p.grid_side << ',' << cell % p.grid_side << ','
            << format_number(p.variances[static_cast<std::size_t>(cell)]) << ','
            << (p.is_foreground(cell) ? 1 : 0) << '\n';
    }
    return out.str();
}

namespace {

struct Options {
    std::string scenario;
    std::string profile;
    std::uint64_t seed = 42;
    std::string policy;
    std::optional<double> gamma;
    std::optional<int> grid;
    std::optional<int> overlap;
    int scale = 2;
    std::string out;
    std::vector<int> scales;
    std::vector<int> steps;
    std::vector<double> capacity_grid;
    std::vector<double> gamma_grid;
    bool execute_pixels = false;
    std::string input;
    int resolution = 512;
    int align = 1;
};

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        fail(ErrorCode::IoError, "cannot create output directory '" + dir.string() + "'");
    }
}

Scenario build_scenario(const Options& o, bool seed_given) {
    std::optional<SystemProfile> profile;
    if (!o.profile.empty()) profile = load_profile(o.profile);
    Scenario s = o.scenario.empty()
                     ? default_scenario(o.seed)
                     : load_scenario(o.scenario, profile.value_or(default_profile()));
    if (profile) s.profile = *profile;
    if (seed_given) s.sa_params.rng_seed = o.seed;
    if (!o.policy.empty()) s.policy = parse_policy(o.policy);
    if (o.gamma) s.gamma = *o.gamma;
    if (o.grid) s.grid_side = *o.grid;
    if (o.overlap) s.overlap = *o.overlap;
    if (!o.scales.empty() || !o.steps.empty()) {
        s.sets = CandidateSets(o.scales.empty() ? s.sets.scales() : o.scales,
                               o.steps.empty() ? s.sets.steps() : o.steps);
    }
    if (o.execute_pixels) s.execute_pixels = true;
    s.validate();
    return s;
}

bool all_failed(const ScenarioReport& report) {
    return !report.records.empty() &&
           std::none_of(report.records.begin(), report.records.end(),
                        [](const TaskRecord& r) { return r.feasible; });
}

std::string safe_file_stem(const std::string& id) {
    std::string s = id;
    for (char& c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_';
        if (!ok) c = '_';
    }
    return s;
}

int report_infeasible(std::ostream& err) {
    err << "ERROR " << to_string(ErrorCode::NoFeasibleConfiguration)
        << ": no request could be scheduled\n";
    return kExitInfeasible;
}

int cmd_optimize(const Options& o, bool seed_given, std::ostream& out, std::ostream& err) {
    const Scenario s = build_scenario(o, seed_given);
    const ScenarioReport report = run_scenario(s);
    const fs::path dir = o.out.empty() ? fs::path("out") : fs::path(o.out);
    ensure_directory(dir);
    write_file_atomic(dir / "schedule.csv", schedule_csv(report));
    for (const auto& task : report.schedule.tasks) {
        if (s.policy != Policy::SimulatedAnnealing) break;
        write_file_atomic(dir / ("trace_" + safe_file_stem(task.request_id) + ".csv"),
                          trace_csv(task.trace));
    }
    out << "policy " << to_string(s.policy) << " total_utility "
        << format_number(report.total_utility) << " feasible " << report.feasible_count << '/'
        << report.records.size() << '\n';
    return all_failed(report) ? report_infeasible(err) : kExitOk;
}

int cmd_simulate(const Options& o, bool seed_given, std::ostream& out, std::ostream& err) {
    const Scenario s = build_scenario(o, seed_given);
    const ScenarioReport report = run_scenario(s);
    const fs::path dir = o.out.empty() ? fs::path("out") : fs::path(o.out);
    ensure_directory(dir);
    write_file_atomic(dir / "report.csv", report_csv(report));
    out << "policy " << to_string(s.policy) << " total_utility "
        << format_number(report.total_utility) << " mean_latency "
        << format_number(report.mean_latency) << " p95_latency "
        << format_number(report.p95_latency) << " mean_quality "
        << format_number(report.mean_quality) << '\n';
    return all_failed(report) ? report_infeasible(err) : kExitOk;
}

int cmd_sweep(const Options& o, bool seed_given, std::ostream& out) {
    Options base = o;
    base.gamma.reset();
    const Scenario s = build_scenario(base, seed_given);
    const fs::path dir = o.out.empty() ? fs::path("out") : fs::path(o.out);
    if (!o.capacity_grid.empty() == !o.gamma_grid.empty()) {
        fail(ErrorCode::InvalidArgument, "sweep needs exactly one of --capacity or --gamma");
    }
    ensure_directory(dir);
    if (!o.capacity_grid.empty()) {
        const auto rows = sweep_capacity(s, o.capacity_grid);
        write_file_atomic(dir / "sweep_capacity.csv", capacity_sweep_csv(rows));
        out << "wrote " << rows.size() << " capacity rows\n";
    } else {
        const auto rows = sweep_gamma(s, o.gamma_grid);
        write_file_atomic(dir / "sweep_gamma.csv", gamma_sweep_csv(rows));
        out << "wrote " << rows.size() << " gamma rows\n";
    }
    return kExitOk;
}

int cmd_partition(const Options& o, std::ostream& out) {
    const Image image = read_netpbm(o.input);
    const auto result =
        select_foreground(image, o.grid.value_or(4), AllocationRatio(o.gamma.value_or(0.25)));
    const fs::path dir = o.out.empty() ? fs::path("out") : fs::path(o.out);
    ensure_directory(dir);
    write_file_atomic(dir / "mask.pgm", encode_netpbm(foreground_mask(result)));
    write_file_atomic(dir / "variances.csv", variance_csv(result));
    out << "foreground";
    for (int c : result.foreground) out << ' ' << c;
    out << '\n';
    return kExitOk;
}

EdgeFlags parse_edges(const json& v, const std::string& where) {
    if (!v.is_object()) fail(ErrorCode::ParseError, "manifest: '" + where + "' must be an object");
    EdgeFlags e;
    for (const auto& [key, val] : v.items()) {
        if (!val.is_boolean()) {
            fail(ErrorCode::ParseError, "manifest: '" + where + "." + key + "' must be a boolean");
        }
        const bool b = val.get<bool>();
        if (key == "left") e.left = b;
        else if (key == "right") e.right = b;
        else if (key == "top") e.top = b;
        else if (key == "bottom") e.bottom = b;
        else fail(ErrorCode::ParseError, "manifest: unknown field '" + where + "." + key + "'");
    }
    return e;
}

int manifest_int(const json& obj, const char* key, const std::string& where, bool required,
                 int fallback = 0) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (required) fail(ErrorCode::ParseError, "manifest: missing field '" + where + key + "'");
        return fallback;
    }
    if (!it->is_number_integer()) {
        fail(ErrorCode::ParseError, "manifest: '" + where + key + "' must be an integer");
    }
    return it->get<int>();
}

int cmd_stitch(const Options& o, std::ostream& out) {
    const fs::path manifest_path = o.input;
    json doc;
    try {
        doc = json::parse(read_file(manifest_path));
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ParseError, std::string("manifest: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) fail(ErrorCode::ParseError, "manifest: top level must be an object");
    for (const auto& [key, _] : doc.items()) {
        if (key != "width" && key != "height" && key != "placements") {
            fail(ErrorCode::ParseError, "manifest: unknown field '" + key + "'");
        }
    }
    const int width = manifest_int(doc, "width", "", true);
    const int height = manifest_int(doc, "height", "", true);
    if (!doc.contains("placements") || !doc["placements"].is_array()) {
        fail(ErrorCode::ParseError, "manifest: 'placements' must be an array");
    }
    std::vector<Placement> placements;
    const fs::path base = manifest_path.parent_path();
    const json& list = doc["placements"];
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string where = "placements[" + std::to_string(i) + "].";
        const json& p = list[i];
        if (!p.is_object()) fail(ErrorCode::ParseError, "manifest: '" + where + "' must be an object");
        for (const auto& [key, _] : p.items()) {
            if (key != "image" && key != "x" && key != "y" && key != "band" && key != "edges") {
                fail(ErrorCode::ParseError, "manifest: unknown field '" + where + key + "'");
            }
        }
        if (!p.contains("image") || !p["image"].is_string()) {
            fail(ErrorCode::ParseError, "manifest: '" + where + "image' must be a string");
        }
        fs::path img_path = p["image"].get<std::string>();
        if (img_path.is_relative()) img_path = base / img_path;
        Placement pl;
        pl.patch = read_netpbm(img_path);
        pl.x = manifest_int(p, "x", where, true);
        pl.y = manifest_int(p, "y", where, true);
        pl.cell = static_cast<int>(i);
        if (p.contains("edges")) pl.edges = parse_edges(p["edges"], where + "edges");
        const int band = manifest_int(p, "band", where, false, 0);
        if (band < 0) fail(ErrorCode::ParseError, "manifest: '" + where + "band' must be >= 0");
        pl.window = feather_window(pl.patch.width, pl.patch.height, band, pl.edges);
        placements.push_back(std::move(pl));
    }
    const Image result = stitch(placements, width, height);
    const fs::path target = o.out.empty() ? fs::path("stitched.ppm") : fs::path(o.out);
    write_file_atomic(target, encode_netpbm(result));
    out << "wrote " << target.string() << ' ' << width << 'x' << height << '\n';
    return kExitOk;
}

int cmd_split(const Options& o, std::ostream& out) {
    const Image image = read_netpbm(o.input);
    const int overlap = o.overlap.value_or(16);
    const auto placements = extract_overlapping(image, o.grid.value_or(4), overlap);
    const fs::path dir = o.out.empty() ? fs::path("out") : fs::path(o.out);
    ensure_directory(dir);
    const char* ext = image.channels == 1 ? ".pgm" : ".ppm";
    json list = json::array();
    for (const auto& p : placements) {
        const std::string name = "patch_" + std::to_string(p.cell) + ext;
        write_file_atomic(dir / name, encode_netpbm(p.patch));
        list.push_back({{"image", name},
                        {"x", p.x},
                        {"y", p.y},
                        {"band", 2 * overlap},
                        {"edges",
                         {{"left", p.edges.left},
                          {"right", p.edges.right},
                          {"top", p.edges.top},
                          {"bottom", p.edges.bottom}}}});
    }
    json doc = {{"width", image.width}, {"height", image.height}, {"placements", list}};
    write_file_atomic(dir / "manifest.json", doc.dump(2) + "\n");
    out << "wrote " << placements.size() << " patches\n";
    return kExitOk;
}

int cmd_enhance(const Options& o, std::ostream& out) {
    const Image image = read_netpbm(o.input);
    const auto result = hybrid_enhance(image, o.grid.value_or(4),
                                       AllocationRatio(o.gamma.value_or(0.25)), o.scale,
                                       o.overlap.value_or(16));
    const fs::path target = o.out.empty() ? fs::path("enhanced.ppm") : fs::path(o.out);
    write_file_atomic(target, encode_netpbm(result.image));
    out << "wrote " << target.string() << ' ' << result.image.width << 'x'
        << result.image.height << '\n';
    return kExitOk;
}

int cmd_calibrate(const Options& o, std::ostream& out) {
    const SystemProfile base = o.profile.empty() ? default_profile() : load_profile(o.profile);
    const auto samples = parse_timing_samples(read_file(o.input));
    const GenLoadFit fit = fit_profile(samples, base.edge_capacity);
    SystemProfile fitted = base;
    fitted.gen_load_coeff = fit.coeff;
    fitted.gen_res_exponent = fit.exponent;
    fitted.validate();
    const fs::path target = o.out.empty() ? fs::path("profile.json") : fs::path(o.out);
    write_file_atomic(target, profile_to_json(fitted));
    out << "gen_load_coeff " << format_number(fit.coeff) << " gen_res_exponent "
        << format_number(fit.exponent) << " residual_norm " << format_number(fit.residual_norm)
        << '\n';
    return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
    const Image image = synth_image(o.seed, o.resolution, o.align);
    const fs::path target = o.out.empty() ? fs::path("synth.ppm") : fs::path(o.out);
    write_file_atomic(target, encode_netpbm(image));
    out << "wrote " << target.string() << '\n';
    return kExitOk;
}

int cmd_scenario(const Options& o, bool seed_given, std::ostream& out) {
    const Scenario s = build_scenario(o, seed_given);
    if (o.out.empty()) {
        out << scenario_to_json(s);
    } else {
        write_file_atomic(o.out, scenario_to_json(s));
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Edge text-to-image serving simulator and patch-based image tools", "edgesr"};
    app.require_subcommand(1);
    Options o;

    auto add_scenario_flags = [&o](CLI::App* sub) {
        sub->add_option("--scenario", o.scenario, "Scenario JSON (defaults to the built-in K=10 scenario)");
        sub->add_option("--profile", o.profile, "SystemProfile JSON overriding the scenario's");
        sub->add_option("--seed", o.seed, "Seed for the default scenario and the annealer");
        sub->add_option("--policy", o.policy, "sa, brute, random, nosr or onetype");
        sub->add_option("--grid", o.grid, "Patch grid side");
        sub->add_option("--overlap", o.overlap, "Patch overlap in pixels");
        sub->add_option("--scales", o.scales, "Candidate SR scales")->delimiter(',');
        sub->add_option("--steps", o.steps, "Candidate denoising steps")->delimiter(',');
        sub->add_option("--out", o.out, "Output directory");
    };

    auto* optimize = app.add_subcommand("optimize", "Schedule a scenario; write schedule and annealing traces");
    add_scenario_flags(optimize);
    optimize->add_option("--gamma", o.gamma, "Allocation ratio");

    auto* simulate = app.add_subcommand("simulate", "Run a scenario and write the per-task report");
    add_scenario_flags(simulate);
    simulate->add_option("--gamma", o.gamma, "Allocation ratio");
    simulate->add_flag("--execute-pixels", o.execute_pixels, "Also run the pixel pipeline");

    auto* sweep = app.add_subcommand("sweep", "Capacity or allocation-ratio sweep");
    add_scenario_flags(sweep);
    sweep->add_option("--capacity", o.capacity_grid, "Edge capacity ratios")->delimiter(',');
    sweep->add_option("--gamma", o.gamma_grid, "Allocation ratios")->delimiter(',');

    auto* scenario = app.add_subcommand("scenario", "Print or write the effective scenario JSON");
    add_scenario_flags(scenario);
    scenario->add_option("--gamma", o.gamma, "Allocation ratio");

    auto* partition = app.add_subcommand("partition", "Variance partition; write mask.pgm and variances.csv");
    partition->add_option("image", o.input, "Input PGM/PPM")->required();
    partition->add_option("--grid", o.grid, "Grid side (default 4)");
    partition->add_option("--gamma", o.gamma, "Allocation ratio (default 0.25)");
    partition->add_option("--out", o.out, "Output directory");

    auto* split = app.add_subcommand("split", "Cut overlapping patches and a stitch manifest");
    split->add_option("image", o.input, "Input PGM/PPM")->required();
    split->add_option("--grid", o.grid, "Grid side (default 4)");
    split->add_option("--overlap", o.overlap, "Overlap in pixels (default 16)");
    split->add_option("--out", o.out, "Output directory");

    auto* stitch_cmd = app.add_subcommand("stitch", "Feathered overlap-add of a patch manifest");
    stitch_cmd->add_option("manifest", o.input, "Manifest JSON")->required();
    stitch_cmd->add_option("--out", o.out, "Output image");

    auto* enhance = app.add_subcommand("enhance", "Hybrid upscale of an image");
    enhance->add_option("image", o.input, "Input PGM/PPM")->required();
    enhance->add_option("--scale", o.scale, "Upscale factor (default 2)");
    enhance->add_option("--gamma", o.gamma, "Allocation ratio (default 0.25)");
    enhance->add_option("--grid", o.grid, "Grid side (default 4)");
    enhance->add_option("--overlap", o.overlap, "Overlap in source pixels (default 16)");
    enhance->add_option("--out", o.out, "Output image");

    auto* calibrate = app.add_subcommand("calibrate", "Fit the generation load model to timings");
    calibrate->add_option("samples", o.input, "CSV with header steps,resolution,seconds")->required();
    calibrate->add_option("--profile", o.profile, "Base profile (default: built-in)");
    calibrate->add_option("--out", o.out, "Output profile JSON");

    auto* synth = app.add_subcommand("synth", "Write a synthetic test image");
    synth->add_option("--seed", o.seed, "Image seed");
    synth->add_option("--resolution", o.resolution, "Side length (default 512)");
    synth->add_option("--align", o.align, "Snap the textured square to this multiple");
    synth->add_option("--out", o.out, "Output PPM");

    std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rest.begin(), rest.end());
    try {
        app.parse(rest);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "ERROR " << to_string(ErrorCode::ParseError) << ": " << e.what() << '\n';
        return kExitInput;
    }

    auto seed_given = [](CLI::App* sub) { return sub->count("--seed") > 0; };
    try {
        if (*optimize) return cmd_optimize(o, seed_given(optimize), out, err);
        if (*simulate) return cmd_simulate(o, seed_given(simulate), out, err);
        if (*sweep) return cmd_sweep(o, seed_given(sweep), out);
        if (*scenario) return cmd_scenario(o, seed_given(scenario), out);
        if (*partition) return cmd_partition(o, out);
        if (*split) return cmd_split(o, out);
        if (*stitch_cmd) return cmd_stitch(o, out);
        if (*enhance) return cmd_enhance(o, out);
        if (*calibrate) return cmd_calibrate(o, out);
        if (*synth) return cmd_synth(o, out);
    } catch (const Error& e) {
        err << "ERROR " << to_string(e.code()) << ": " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "ERROR " << to_string(ErrorCode::IoError) << ": " << e.what() << '\n';
        return kExitIo;
    }
    return kExitInput;
}

}  // namespace edgesr
