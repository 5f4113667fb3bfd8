#pragma once

// Energy-barrier sweeps: for each barrier in a list, derive the anisotropy
// field, run a backend over the input-voltage grid and collate the points.

#include "pbitsim/device_model.hpp"
#include "pbitsim/spice_bridge.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pbitsim::sweep {

/// One barrier per non-blank line, in kT multiples; '#' starts a comment
/// line. Throws ParseError (with line) or EmptyInputError.
std::vector<EnergyBarrier> parse_barrier_list(std::string_view text,
                                              double temperature = kDefaultTemperatureK);

/// `steps` evenly spaced points from start to stop inclusive; point k is
/// start + (stop - start) * k / (steps - 1).
std::vector<double> linspace(double start, double stop, std::size_t steps);

/// External backend settings. Each barrier gets its own patched netlist and
/// log, derived from these paths by appending ".<barrier index>".
struct ExternalBackend {
    std::filesystem::path netlist_template;
    std::vector<std::string> command_template;
    std::filesystem::path work_prefix;  // patched netlists: <prefix>.<k>.sp
    std::filesystem::path log_prefix;   // logs: <prefix>.<k>.log
    std::string output_marker = "VOUT";
    std::chrono::milliseconds timeout{std::chrono::seconds(60)};
};

struct SweepSpec {
    std::vector<EnergyBarrier> barriers;
    MagnetParams magnet;
    DeviceGeometry geometry;
    PbitElectrical elec;
    std::optional<ExternalBackend> external;  // nullopt: internal backend
    std::vector<double> v_grid;
    std::size_t samples_per_point = spice::kExactSamples;
    std::uint64_t seed = 0;
    /// Worker threads; 0 picks std::thread::hardware_concurrency().
    std::size_t threads = 1;

    /// Throws DomainError when an invariant is violated.
    void validate() const;
};

struct SweepRow {
    double e_b_kt = 0.0;
    double h_k = 0.0;
    double v_in = 0.0;
    /// Probability for the internal backend, output volts for external.
    double p_high = 0.0;
    std::size_t n_samples = 0;

    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

/// Raised when a barrier's backend fails; rows of all earlier barriers are
/// kept in partial_rows().
class SweepError : public std::runtime_error {
public:
    SweepError(std::size_t barrier_index, double barrier_kt, std::vector<SweepRow> partial,
               const std::string& cause, int exit_code);
    std::size_t barrier_index() const noexcept { return index_; }
    double barrier_kt() const noexcept { return kt_; }
    const std::vector<SweepRow>& partial_rows() const noexcept { return partial_; }
    /// Exit code of the underlying failure (1 data, 3 environment).
    int exit_code() const noexcept { return exit_code_; }

private:
    std::size_t index_;
    double kt_;
    std::vector<SweepRow> partial_;
    int exit_code_;
};

/// Rows are ordered by barrier (input order) then by grid point, regardless
/// of how many threads run. Barrier k draws from make_stream(seed, k).
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

inline constexpr std::string_view kResultsHeader = "eb_kt,hk_oe,vin_v,p_high,n_samples";

/// CSV text for the rows. Each stamp line is emitted first, prefixed "# ".
std::string format_results(std::span<const SweepRow> rows,
                           std::span<const std::string> stamp = {});

/// Atomic write of format_results. Throws DomainError for empty rows.
void write_results(std::span<const SweepRow> rows, const std::filesystem::path& path,
                   std::span<const std::string> stamp = {});

/// Reads results CSV text back; '#' lines are skipped.
std::vector<SweepRow> parse_results(std::string_view text);

}  // namespace pbitsim::sweep
