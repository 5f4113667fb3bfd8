#include "pbitsim/device_model.hpp"

#include "pbitsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace pbitsim {
namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

double DeviceGeometry::volume() const {
    return std::numbers::pi / 4.0 * major_axis * minor_axis * free_layer_thickness;
}

void DeviceGeometry::validate() const {
    if (!positive_finite(major_axis) || !positive_finite(minor_axis) ||
        !positive_finite(free_layer_thickness)) {
        throw DomainError("device dimensions must be strictly positive");
    }
    if (!positive_finite(volume())) {
        throw DomainError("device volume underflows to zero");
    }
}

void MagnetParams::validate() const {
    if (!positive_finite(m_s)) throw DomainError("saturation magnetization must be > 0");
    if (!positive_finite(temperature)) throw DomainError("temperature must be > 0");
    if (!positive_finite(attempt_rate)) throw DomainError("attempt rate must be > 0");
    if (!std::isfinite(h_k) || h_k < 0.0) throw DomainError("anisotropy field must be >= 0");
}

void PbitElectrical::validate() const {
    if (!std::isfinite(v_dd) || !std::isfinite(v_th) || !(v_th > 0.0) || !(v_th < v_dd)) {
        throw DomainError("electrical rails require 0 < v_th < v_dd");
    }
}

EnergyBarrier EnergyBarrier::from_erg(double erg, double temperature) {
    if (!positive_finite(temperature)) throw DomainError("temperature must be > 0");
    if (!std::isfinite(erg) || erg < 0.0) throw DomainError("energy barrier must be finite and >= 0");
    return EnergyBarrier(erg, erg / (kBoltzmannErgPerKelvin * temperature), temperature);
}

EnergyBarrier EnergyBarrier::from_kt(double kt_multiple, double temperature) {
    if (!positive_finite(temperature)) throw DomainError("temperature must be > 0");
    if (!std::isfinite(kt_multiple) || kt_multiple < 0.0) {
        throw DomainError("energy barrier must be finite and >= 0 kT");
    }
    return EnergyBarrier(kt_multiple * kBoltzmannErgPerKelvin * temperature, kt_multiple,
                         temperature);
}

EnergyBarrier energy_barrier(double h_k, double m_s, double volume, double temperature) {
    if (!positive_finite(m_s)) throw DomainError("saturation magnetization must be > 0");
    if (!positive_finite(volume)) throw DomainError("volume must be > 0");
    if (!std::isfinite(h_k) || h_k < 0.0) throw DomainError("anisotropy field must be >= 0");
    return EnergyBarrier::from_erg(0.5 * h_k * m_s * volume, temperature);
}

double anisotropy_from_barrier(const EnergyBarrier& e_b, double m_s, double volume) {
    const double denom = m_s * volume;
    if (!positive_finite(denom)) {
        throw DomainError("anisotropy requires m_s * volume > 0");
    }
    return 2.0 * e_b.erg() / denom;
}

double normalized_drive(double v_in, const PbitElectrical& elec) {
    const double i = 2.0 * (v_in - elec.v_mid()) / (elec.v_dd - elec.v_th);
    return std::clamp(i, -1.0, 1.0);
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double p_high_from_drive(double drive, const EnergyBarrier& e_b) {
    return logistic(2.0 * e_b.kt_multiple() * drive);
}

double steady_state_p_high(double v_in, const EnergyBarrier& e_b, const PbitElectrical& elec) {
    return p_high_from_drive(normalized_drive(v_in, elec), e_b);
}

TelegraphRates telegraph_rates(double drive, const EnergyBarrier& e_b, double attempt_rate) {
    const double k = e_b.kt_multiple();
    return {attempt_rate * std::exp(-k * (1.0 + drive)),
            attempt_rate * std::exp(-k * (1.0 - drive))};
}

double max_time_step(double drive, const EnergyBarrier& e_b, double attempt_rate) {
    const auto rates = telegraph_rates(drive, e_b, attempt_rate);
    // shaved by a relative 1e-12 so rate * dt never rounds above the limit
    return kMaxStepProbability / std::max(rates.high_to_low, rates.low_to_high) * (1.0 - 1e-12);
}

std::vector<std::uint8_t> telegraph_trace_drive(double drive, const EnergyBarrier& e_b,
                                                std::size_t n_steps, double dt, Rng& rng,
                                                double attempt_rate) {
    if (n_steps == 0) throw DomainError("telegraph trace needs at least one step");
    if (!positive_finite(dt)) throw DomainError("time step must be > 0");
    if (!positive_finite(attempt_rate)) throw DomainError("attempt rate must be > 0");
    drive = std::clamp(drive, -1.0, 1.0);

    const auto rates = telegraph_rates(drive, e_b, attempt_rate);
    const double p_fall = rates.high_to_low * dt;
    const double p_rise = rates.low_to_high * dt;
    if (std::max(p_fall, p_rise) > kMaxStepProbability) {
        throw DomainError("time step too coarse: rate*dt = " +
                          std::to_string(std::max(p_fall, p_rise)) + " exceeds " +
                          std::to_string(kMaxStepProbability));
    }

    std::vector<std::uint8_t> trace(n_steps);
    std::uint8_t state = uniform01(rng) < p_high_from_drive(drive, e_b) ? 1 : 0;
    trace[0] = state;
    for (std::size_t n = 1; n < n_steps; ++n) {
        const double u = uniform01(rng);
        if (state == 1) {
            if (u < p_fall) state = 0;
        } else if (u < p_rise) {
            state = 1;
        }
        trace[n] = state;
    }
    return trace;
}

std::vector<std::uint8_t> telegraph_trace(double v_in, const EnergyBarrier& e_b,
                                          const PbitElectrical& elec, std::size_t n_steps,
                                          double dt, Rng& rng, double attempt_rate) {
    elec.validate();
    return telegraph_trace_drive(normalized_drive(v_in, elec), e_b, n_steps, dt, rng,
                                 attempt_rate);
}

std::vector<EnergyBarrier> sample_barriers(const DeviceGeometry& nominal,
                                           const MagnetParams& magnet, double sigma_rel,
                                           std::size_t n, Rng& rng) {
    nominal.validate();
    magnet.validate();
    if (!(sigma_rel >= 0.0 && sigma_rel < 0.3)) {
        throw DomainError("relative variation must lie in [0, 0.3)");
    }
    if (n == 0) throw DomainError("need at least one sample");

    std::normal_distribution<double> unit_normal(0.0, 1.0);
    auto perturb = [&](double dim) {
        while (true) {
            const double d = dim + sigma_rel * dim * unit_normal(rng);
            if (d > 0.0) return d;
        }
    };

    std::vector<EnergyBarrier> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        DeviceGeometry g{perturb(nominal.major_axis), perturb(nominal.minor_axis),
                         perturb(nominal.free_layer_thickness)};
        out.push_back(energy_barrier(magnet.h_k, magnet.m_s, g.volume(), magnet.temperature));
    }
    return out;
}

}  // namespace pbitsim
