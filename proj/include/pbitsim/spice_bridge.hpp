#pragma once

// Netlist patching, external simulator execution and console-output
// extraction, plus an in-process behavioral backend with the same output
// shape.

#include "pbitsim/device_model.hpp"
#include "pbitsim/rng.hpp"

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pbitsim::spice {

/// Parameter token patched in netlists. Byte-exact, trailing space included.
inline constexpr std::string_view kAnisotropyToken = "HK= ";
inline constexpr std::string_view kNetlistPlaceholder = "{netlist}";

/// Replaces the number after every "HK= " token with the shortest exact
/// decimal rendering of h_k; all other bytes are preserved.
/// Throws ParseError when the token is absent or a number is malformed.
std::string patch_anisotropy(std::string_view netlist, double h_k);

struct SimJob {
    std::filesystem::path netlist_path;
    /// argv of the simulator; exactly one occurrence of "{netlist}" overall.
    std::vector<std::string> command_template;
    std::filesystem::path log_path;
    std::string output_marker = "VOUT";
    std::chrono::milliseconds timeout{std::chrono::seconds(60)};

    /// Throws DomainError on an invalid template or timeout.
    void validate() const;
    std::vector<std::string> argv() const;
};

/// Splits a command line into arguments on whitespace. Single and double
/// quotes group words; no other shell syntax is interpreted.
std::vector<std::string> tokenize_command(std::string_view command);

struct RunResult {
    std::string output;  // combined stdout + stderr
    int exit_status = 0;
};

/// Runs the simulator without a shell, capturing stdout and stderr into one
/// stream that is written byte-exactly to job.log_path and returned.
/// Throws EnvironmentError if the process cannot be spawned, TimeoutError
/// (log written) when the deadline passes, SimulatorError (log written) on
/// a nonzero exit status.
RunResult run_external(const SimJob& job);

struct VoltagePoint {
    double v_in = 0.0;
    double v_out = 0.0;
    /// Set by the internal backend; external simulators report volts only.
    std::optional<double> p_high;
};

/// Parses every line whose first field equals `marker` as
/// "<marker> <v_in> <v_out>". Other lines are ignored.
/// Throws ParseError on bad marker lines, EmptyResultError if none exist.
std::vector<VoltagePoint> extract_output_voltages(std::string_view raw, std::string_view marker);

/// Inverse of extract_output_voltages: one marker line per point.
std::string format_marker_lines(std::span<const VoltagePoint> points, std::string_view marker);

/// samples_per_point == 0 selects the closed-form stationary probability.
inline constexpr std::size_t kExactSamples = 0;

/// Behavioral stand-in for the circuit simulator. For each grid voltage the
/// high-state probability is either the closed form or the occupancy of a
/// telegraph trace of samples_per_point steps (at the coarsest admissible
/// time step). v_out is the time-averaged output voltage p_high * v_dd.
std::vector<VoltagePoint> simulate_internal(const EnergyBarrier& e_b, const PbitElectrical& elec,
                                            std::span<const double> v_grid,
                                            std::size_t samples_per_point, Rng& rng,
                                            double attempt_rate = kDefaultAttemptRateHz);

}  // namespace pbitsim::spice
