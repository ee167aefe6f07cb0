#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "edgesr/domain.hpp"

namespace edgesr {

// Calibration constants for the load, transmission and quality curves.
//
// Units: loads in GFLOP, capacities in GFLOP/s, bandwidth in Mbit/s, data in
// Mbit. Resolutions enter the power laws normalised by 1000 px.
struct SystemProfile {
    double edge_capacity = 0;           // GFLOP/s
    double device_capacity = 0;         // GFLOP/s
    double bandwidth = 0;               // Mbit/s
    double gen_load_coeff = 0;          // GFLOP per step at 1000 px
    double gen_res_exponent = 0;
    double sr_edge_coeff = 0;           // GFLOP, full image at 1000 px
    double sr_device_coeff = 0;         // GFLOP, full image at 1000 px
    double sr_res_exponent = 0;
    double sr_gamma_exponent = 1;       // shape of the branch share; 1 is linear
    double bits_per_pixel = 0;
    double quality_step_rate = 0;
    double quality_peak_resolution = 0;
    double quality_res_width = 0;
    double quality_max = 0;
    double enhance_max_ratio = 1;
    double enhance_exponent = 0;

    // Throws InvalidArgument naming the first offending field.
    void validate() const;

    // Copy with edge capacity multiplied by `ratio`.
    SystemProfile with_edge_scale(double ratio) const;

    bool operator==(const SystemProfile&) const = default;
};

// The calibrated profile shipped as profiles/default.json.
SystemProfile default_profile();

std::vector<std::string> profile_field_names();

struct LatencyBreakdown {
    double t_gen = 0;        // generation at the edge
    double t_sr_edge = 0;    // diffusion SR on foreground patches
    double t_sr_device = 0;  // learning SR on background patches
    double t_tx_enhanced = 0;
    double t_tx_raw = 0;
    double t_enhance = 0;    // slower of the two parallel branches
    double total = 0;
};

double load_gen(int steps, int resolution, const SystemProfile& profile);
double load_sr_edge(int resolution, const AllocationRatio& gamma, const SystemProfile& profile);
double load_sr_device(int resolution, const AllocationRatio& gamma, const SystemProfile& profile);

double latency_inference(int steps, int resolution, const SystemProfile& profile);

struct SrLatency {
    double edge = 0;
    double device = 0;
};
SrLatency latency_sr(int resolution, const AllocationRatio& gamma, const SystemProfile& profile);

// Mbit carried when `fraction` of a resolution x resolution image is sent.
double data_volume(int resolution, double fraction, const SystemProfile& profile);

struct TxLatency {
    double enhanced = 0;
    double raw = 0;
};
TxLatency latency_transmission(int target_resolution, int initial_resolution,
                               const AllocationRatio& gamma, const SystemProfile& profile);

LatencyBreakdown latency_total(const Request& request, const Configuration& config,
                               const AllocationRatio& gamma, const SystemProfile& profile);

double quality_base(int steps, int resolution, const SystemProfile& profile);
double quality_multiplier(const AllocationRatio& gamma, const SystemProfile& profile);
double quality_final(const Request& request, const Configuration& config,
                     const AllocationRatio& gamma, const SystemProfile& profile);

// ---- profile files and calibration ----

SystemProfile parse_profile(const std::string& json_text);
SystemProfile load_profile(const std::filesystem::path& path);
std::string profile_to_json(const SystemProfile& profile);

struct TimingSample {
    int steps = 0;
    int resolution = 0;
    double seconds = 0;
};

struct GenLoadFit {
    double coeff = 0;
    double exponent = 0;
    double residual_norm = 0;  // L2 norm of log-space residuals
};

// Least squares in log space for seconds = coeff * steps * (R/1000)^exponent / edge_capacity.
GenLoadFit fit_profile(const std::vector<TimingSample>& samples, double edge_capacity);

// CSV with header `steps,resolution,seconds`.
std::vector<TimingSample> parse_timing_samples(const std::string& csv_text);

}  // namespace edgesr
