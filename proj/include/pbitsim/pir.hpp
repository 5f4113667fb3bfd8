#pragma once

// Probabilistic inference recorder (PIR) data shared by the inference and
// analysis stages.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace pbitsim {

struct PirNeuron {
    int digit = 0;
    double probability = 0.0;

    friend bool operator==(const PirNeuron&, const PirNeuron&) = default;
};

/// Per-digit output probabilities recorded for one testcase.
struct PirTestcase {
    std::string case_id;
    std::vector<PirNeuron> neurons;

    friend bool operator==(const PirTestcase&, const PirTestcase&) = default;
};

/// Energy per testcase in femtojoules, keyed by PIR precision in bits.
using EnergyTable = std::map<int, double>;

/// 3 bits: 90.75 fJ, 4 bits: 124.2 fJ, 5 bits: 176.0 fJ.
EnergyTable default_energy_table();

struct PirConfig {
    int bits = 4;
    std::size_t n_reads = 256;
    EnergyTable energy_per_testcase = default_energy_table();

    /// Throws DomainError unless bits >= 1, n_reads >= 1 and the energy
    /// table has an entry for `bits`.
    void validate() const;
    double energy_fj() const;
};

/// Rounds p to the nearest of the 2^bits levels k / (2^bits - 1); exact
/// ties round up. Throws DomainError for p outside [0, 1] or bits outside
/// [1, 30].
double quantize_pir(double p, int bits);

}  // namespace pbitsim
