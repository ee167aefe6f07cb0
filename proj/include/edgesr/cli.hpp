#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "edgesr/error.hpp"
#include "edgesr/partitioner.hpp"
#include "edgesr/simulator.hpp"

namespace edgesr {

enum ExitCode : int {
    kExitOk = 0,
    kExitInput = 2,
    kExitInfeasible = 3,
    kExitIo = 4,
};

int exit_code_for(ErrorCode code) noexcept;

inline constexpr const char* kScheduleHeader = "request_id,policy,scale,steps,utility,error";
inline constexpr const char* kTraceHeader = "temp,iter,scale,steps,utility,accepted,reason";
inline constexpr const char* kVarianceHeader = "cell,row,col,variance,foreground";

// One row per request in scenario order; failed requests leave scale/steps empty.
std::string schedule_csv(const ScenarioReport& report);
std::string trace_csv(const AnnealTrace& trace);
std::string variance_csv(const PartitionResult& partition);

// Entry point shared by the executable and the tests. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace edgesr
