#pragma once

// Behavioral model of an MRAM p-bit neuron.
//
// The device layer works in CGS units: lengths in cm, anisotropy field in Oe,
// saturation magnetization in emu/cm^3, energies in erg. Barriers are also
// carried as multiples of k_B*T at a declared temperature.
//
// The stochastic output is a two-state telegraph process whose switching
// rates follow the Neel-Arrhenius law with a bias-tilted barrier:
//
//   rate(1->0) = f0 * exp(-Eb/kT * (1 + i))
//   rate(0->1) = f0 * exp(-Eb/kT * (1 - i))
//
// where i in [-1, 1] is the normalized input drive. Its stationary
// probability of the high state is sigmoid(2 * Eb/kT * i).

#include "pbitsim/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pbitsim {

inline constexpr double kBoltzmannErgPerKelvin = 1.380649e-16;
inline constexpr double kDefaultTemperatureK = 300.0;
inline constexpr double kDefaultAttemptRateHz = 1e9;
/// Largest admissible per-step switching probability (rate * dt).
inline constexpr double kMaxStepProbability = 0.1;

/// Elliptical free layer, all lengths in cm.
struct DeviceGeometry {
    double major_axis = 90e-7;
    double minor_axis = 40e-7;
    double free_layer_thickness = 1e-7;

    /// (pi/4) * major * minor * thickness, in cm^3.
    double volume() const;
    /// Throws DomainError unless every dimension is strictly positive.
    void validate() const;
};

struct MagnetParams {
    double h_k = 0.0;          // Oe
    double m_s = 1100.0;       // emu/cm^3
    double temperature = kDefaultTemperatureK;
    double attempt_rate = kDefaultAttemptRateHz;

    void validate() const;
};

struct PbitElectrical {
    double v_dd = 1.0;
    double v_th = 0.5;

    double v_mid() const { return 0.5 * (v_dd + v_th); }
    /// Throws DomainError unless 0 < v_th < v_dd.
    void validate() const;
};

/// Energy barrier between the two magnet orientations.
class EnergyBarrier {
public:
    static EnergyBarrier from_erg(double erg, double temperature = kDefaultTemperatureK);
    static EnergyBarrier from_kt(double kt_multiple, double temperature = kDefaultTemperatureK);

    double erg() const noexcept { return erg_; }
    double kt_multiple() const noexcept { return kt_multiple_; }
    double temperature() const noexcept { return temperature_; }

    friend bool operator==(const EnergyBarrier&, const EnergyBarrier&) = default;

private:
    EnergyBarrier(double erg, double kt, double temperature)
        : erg_(erg), kt_multiple_(kt), temperature_(temperature) {}

    double erg_;
    double kt_multiple_;
    double temperature_;
};

/// Eb = 0.5 * Hk * Ms * V.
EnergyBarrier energy_barrier(double h_k, double m_s, double volume,
                             double temperature = kDefaultTemperatureK);

/// Hk = 2 * Eb / (Ms * V); the inverse of energy_barrier.
double anisotropy_from_barrier(const EnergyBarrier& e_b, double m_s, double volume);

/// Input voltage mapped linearly onto [-1, 1]: -1 at v_th, +1 at v_dd,
/// saturating outside that window.
double normalized_drive(double v_in, const PbitElectrical& elec);

double logistic(double x);

/// sigmoid(2 * kt_multiple * drive).
double p_high_from_drive(double drive, const EnergyBarrier& e_b);

/// Stationary probability that the p-bit output sits at V_DD.
double steady_state_p_high(double v_in, const EnergyBarrier& e_b, const PbitElectrical& elec);

struct TelegraphRates {
    double high_to_low;  // 1/s
    double low_to_high;  // 1/s
};

TelegraphRates telegraph_rates(double drive, const EnergyBarrier& e_b,
                               double attempt_rate = kDefaultAttemptRateHz);

/// Largest dt for which every per-step switching probability stays within
/// kMaxStepProbability.
double max_time_step(double drive, const EnergyBarrier& e_b,
                     double attempt_rate = kDefaultAttemptRateHz);

/// Discrete-time sample path of the telegraph process at a fixed drive.
/// The initial state is drawn from the stationary distribution, so every
/// step is an unbiased sample of the stationary occupancy.
/// Throws DomainError when n_steps == 0, dt <= 0, or dt * max rate exceeds
/// kMaxStepProbability.
std::vector<std::uint8_t> telegraph_trace_drive(double drive, const EnergyBarrier& e_b,
                                                std::size_t n_steps, double dt, Rng& rng,
                                                double attempt_rate = kDefaultAttemptRateHz);

std::vector<std::uint8_t> telegraph_trace(double v_in, const EnergyBarrier& e_b,
                                          const PbitElectrical& elec, std::size_t n_steps,
                                          double dt, Rng& rng,
                                          double attempt_rate = kDefaultAttemptRateHz);

/// Process-variation Monte Carlo: each dimension independently drawn from
/// N(nominal, (sigma_rel * nominal)^2), redrawing non-positive values, then
/// pushed through energy_barrier. Requires 0 <= sigma_rel < 0.3 and n >= 1.
std::vector<EnergyBarrier> sample_barriers(const DeviceGeometry& nominal,
                                           const MagnetParams& magnet, double sigma_rel,
                                           std::size_t n, Rng& rng);

}  // namespace pbitsim
