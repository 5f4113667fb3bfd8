#include "pbitsim/pir.hpp"

#include "pbitsim/errors.hpp"

#include <cmath>

namespace pbitsim {

EnergyTable default_energy_table() { return {{3, 90.75}, {4, 124.2}, {5, 176.0}}; }

void PirConfig::validate() const {
    if (bits < 1 || bits > 30) throw DomainError("PIR precision must be 1..30 bits");
    if (n_reads < 1) throw DomainError("PIR needs at least one read per testcase");
    if (!energy_per_testcase.contains(bits)) {
        throw DomainError("energy table has no entry for " + std::to_string(bits) + " bits");
    }
}

double PirConfig::energy_fj() const {
    validate();
    return energy_per_testcase.at(bits);
}

double quantize_pir(double p, int bits) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability outside [0, 1]");
    if (bits < 1 || bits > 30) throw DomainError("PIR precision must be 1..30 bits");
    const double levels = static_cast<double>((1u << bits) - 1u);
    return std::floor(p * levels + 0.5) / levels;
}

}  // namespace pbitsim
