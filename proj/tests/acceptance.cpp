// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "judge_oracle.hpp"

#include "pbitsim/analyzer.hpp"
#include "pbitsim/device_model.hpp"
#include "pbitsim/rbm.hpp"
#include "pbitsim/rng.hpp"
#include "pbitsim/spice_bridge.hpp"
#include "pbitsim/sweep.hpp"
#include "pbitsim/text_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

namespace fs = std::filesystem;
using namespace pbitsim;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

double log_uniform(Rng& rng, double lo, double hi) {
    return lo * std::pow(hi / lo, uniform01(rng));
}

Outcome roundtrip() {
    Rng rng(101);
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const double h_k = log_uniform(rng, 1.0, 1e5);
        const double m_s = log_uniform(rng, 100.0, 2000.0);
        const double volume = log_uniform(rng, 1e-20, 1e-16);
        const double back = anisotropy_from_barrier(energy_barrier(h_k, m_s, volume), m_s, volume);
        worst = std::max(worst, std::abs(back - h_k) / h_k);
    }
    const double elapsed = seconds_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof buf, "max rel err %.3g, %.3f s", worst, elapsed);
    return {worst <= 1e-12 && elapsed < 1.0, buf};
}

Outcome telegraph() {
    const auto t0 = Clock::now();
    constexpr std::size_t kSteps = 100000;
    double worst_z = 0.0;
    std::uint64_t index = 0;
    for (double kt : {1.0, 5.0, 10.0}) {
        for (double i : {-0.9, -0.3, 0.0, 0.3, 0.9}) {
            const auto eb = EnergyBarrier::from_kt(kt);
            const double dt = max_time_step(i, eb);
            auto rng = make_stream(2024, index++);
            const auto trace = telegraph_trace_drive(i, eb, kSteps, dt, rng);
            double mean = 0.0;
            for (auto s : trace) mean += s;
            mean /= static_cast<double>(kSteps);

            // lag-1 correlation of the two-state chain sets the effective sample size
            const auto rates = telegraph_rates(i, eb);
            const double rho = 1.0 - rates.high_to_low * dt - rates.low_to_high * dt;
            const double n_eff = kSteps * (1.0 - rho) / (1.0 + rho);
            const double p = p_high_from_drive(i, eb);
            const double sigma = std::sqrt(p * (1.0 - p) / n_eff);
            worst_z = std::max(worst_z, std::abs(mean - p) / sigma);
        }
    }
    const double elapsed = seconds_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof buf, "worst |z| %.2f over 15 points, %.2f s", worst_z, elapsed);
    return {worst_z <= 3.0 && elapsed < 30.0, buf};
}

Outcome steepness() {
    sweep::SweepSpec spec;
    for (double kt : {1.0, 5.0, 20.0, 40.0}) spec.barriers.push_back(EnergyBarrier::from_kt(kt));
    // drive in [-0.75, 0.75]: wide enough to span the transition, narrow
    // enough that sigmoid(2 * 40 * i) stays below 1 in double precision
    const double v_mid = spec.elec.v_mid();
    const double half = 0.375 * (spec.elec.v_dd - spec.elec.v_th);
    spec.v_grid = sweep::linspace(v_mid - half, v_mid + half, 11);
    const auto rows = sweep::run_sweep(spec);
    const std::size_t n_grid = spec.v_grid.size();

    Outcome out;
    if (rows.size() != spec.barriers.size() * n_grid) return {false, "unexpected row count"};
    std::size_t comparisons = 0;
    for (std::size_t g = 0; g < n_grid; ++g) {
        const double v = spec.v_grid[g];
        for (std::size_t b = 1; b < spec.barriers.size(); ++b) {
            const double lo = rows[(b - 1) * n_grid + g].p_high;
            const double hi = rows[b * n_grid + g].p_high;
            bool ok = true;
            if (v > v_mid) ok = hi > lo;
            if (v < v_mid) ok = hi < lo;
            if (v == v_mid) ok = hi == 0.5 && lo == 0.5;
            ++comparisons;
            if (!ok) {
                out.pass = false;
                out.detail = "order violated at v_in " + text::format_double(v);
            }
        }
        for (std::size_t b = 0; b < spec.barriers.size(); ++b) {
            const double p = rows[b * n_grid + g].p_high;
            const double mirror = rows[b * n_grid + (n_grid - 1 - g)].p_high;
            if (std::abs(p + mirror - 1.0) > 1e-15) {
                out.pass = false;
                out.detail = "point symmetry violated at v_in " + text::format_double(v);
            }
        }
    }
    if (out.pass) out.detail = std::to_string(comparisons) + " strict comparisons on an 11-point grid";
    return out;
}

PirTestcase random_testcase(Rng& rng, int bits, std::string id) {
    PirTestcase tc{std::move(id), {}};
    const int levels = (1 << bits) - 1;
    std::vector<int> digits{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::shuffle(digits.begin(), digits.end(), rng);
    const auto count = std::uniform_int_distribution<std::size_t>(0, 10)(rng);
    for (std::size_t k = 0; k < count; ++k) {
        const int level = std::uniform_int_distribution<int>(0, levels)(rng);
        tc.neurons.push_back({digits[k], static_cast<double>(level) / levels});
    }
    return tc;
}

Outcome judge_equivalence() {
    Rng rng(404);
    std::size_t ties = 0, passes = 0;
    for (int k = 0; k < 1000; ++k) {
        const int bits = std::uniform_int_distribution<int>(1, 4)(rng);
        const auto tc = random_testcase(rng, bits, std::to_string(k));
        const int expected = std::uniform_int_distribution<int>(0, 9)(rng);
        const auto got = analyzer::judge_testcase(expected, tc);
        const auto want = oracle::judge(expected, tc);
        if (got.verdict != want.verdict || got.reason != want.reason) {
            return {false, "disagreement on case " + std::to_string(k)};
        }
        ties += got.reason == analyzer::Reason::TieBeyondTopTwo;
        passes += got.verdict == analyzer::Verdict::Pass;
    }
    return {true, "1000 cases agree (" + std::to_string(passes) + " pass, " + std::to_string(ties) +
                      " tie-beyond-top-two)"};
}

std::string random_filler(Rng& rng, std::size_t max_len) {
    // no 'K' so the token can never appear by accident
    static const std::string alphabet = "abcdefgh.=*+-_ ()\n\t0123456789HMV";
    const auto len = std::uniform_int_distribution<std::size_t>(0, max_len)(rng);
    std::string s;
    for (std::size_t k = 0; k < len; ++k) {
        s += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
    }
    return s;
}

std::string random_number(Rng& rng) {
    static const std::vector<std::string> forms = {"400", "1065.55", "-2.5", "0.001", "7e3",
                                                   "1.5E-2", "12", ".5", "3.0e+02"};
    return forms[std::uniform_int_distribution<std::size_t>(0, forms.size() - 1)(rng)];
}

Outcome netlist_patching() {
    Rng rng(505);
    static const std::string delimiters[] = {" ", "\n", ")", "\t", ",", "\r\n"};
    for (int deck = 0; deck < 100; ++deck) {
        const double h_k = log_uniform(rng, 1.0, 1e5);
        const auto value = text::format_double(h_k);
        const int tokens = std::uniform_int_distribution<int>(1, 3)(rng);
        std::string input = "* deck " + std::to_string(deck) + "\n";
        std::string expected = input;
        for (int t = 0; t < tokens; ++t) {
            const auto before = random_filler(rng, 40);
            const std::string pad(std::uniform_int_distribution<int>(0, 2)(rng), ' ');
            const auto after = delimiters[std::uniform_int_distribution<int>(0, 5)(rng)];
            input += before + ".param HK= " + pad + random_number(rng) + after;
            expected += before + ".param HK= " + pad + value + after;
        }
        const auto tail = random_filler(rng, 40) + "\n.end\n";
        input += tail;
        expected += tail;

        const auto once = spice::patch_anisotropy(input, h_k);
        if (once != expected) return {false, "byte difference in deck " + std::to_string(deck)};
        if (spice::patch_anisotropy(once, h_k) != once) {
            return {false, "not idempotent on deck " + std::to_string(deck)};
        }
    }
    return {true, "100 decks byte-exact and idempotent"};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(PBITSIM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism(const fs::path& dir) {
    sweep::SweepSpec spec;
    for (double kt : {10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0}) {
        spec.barriers.push_back(EnergyBarrier::from_kt(kt));
    }
    spec.v_grid = sweep::linspace(spec.elec.v_th, spec.elec.v_dd, 11);
    spec.samples_per_point = 2000;
    spec.seed = 77;

    std::vector<std::string> bodies;
    for (std::size_t threads : {1, 1, 0, 0}) {
        spec.threads = threads;
        const auto path = dir / ("det" + std::to_string(bodies.size()) + ".csv");
        sweep::write_results(sweep::run_sweep(spec), path);
        bodies.push_back(text::read_file(path));
    }
    if (!std::all_of(bodies.begin(), bodies.end(), [&](const auto& b) { return b == bodies[0]; })) {
        return {false, "library sweep output differs between runs"};
    }

    text::write_file_atomic(dir / "barriers.txt", "10\n20\n30\n40\n50\n60\n70\n80\n");
    const auto base = "sweep --barriers " + (dir / "barriers.txt").string() + " --samples 2000 --seed 77";
    if (run_cli(base + " --threads 1 --out " + (dir / "cli1.csv").string()) != 0 ||
        run_cli(base + " --threads 0 --out " + (dir / "cli2.csv").string()) != 0 ||
        run_cli(base + " --threads 0 --out " + (dir / "cli3.csv").string()) != 0) {
        return {false, "sweep command failed"};
    }
    const auto c1 = text::read_file(dir / "cli1.csv");
    if (c1 != text::read_file(dir / "cli2.csv") || c1 != text::read_file(dir / "cli3.csv")) {
        return {false, "command-line sweep output differs between runs"};
    }
    return {true, "library and command-line results byte-identical, 1 thread vs all cores"};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

Outcome learning() {
    const auto t0 = Clock::now();
    std::vector<double> err3, err4;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto train = rbm::make_pattern_set(300, 3, 0.15, seed * 1000 + 1);
        const auto test = rbm::make_pattern_set(60, 3, 0.15, seed * 1000 + 2);
        rbm::TrainConfig cfg;
        cfg.hidden = 32;
        cfg.epochs = 30;
        cfg.learning_rate = 0.05;
        cfg.label_units = 3;
        cfg.seed = seed;
        const auto model = rbm::train_cd1(train, cfg).model;

        const auto eb = EnergyBarrier::from_kt(40);
        const auto probe = rbm::map_weights(model, 1e-6, 1e-4, 1.0);
        const double r_sense = rbm::matched_sense_resistance(probe.weight_scale, 1e-6, 1e-4, eb, 0.3);
        const auto crossbar = rbm::map_weights(model, 1e-6, 1e-4, r_sense);

        std::vector<analyzer::DatasetRecord> records;
        for (std::size_t k = 0; k < test.size(); ++k) records.push_back({std::to_string(k), test[k].label});
        for (int bits : {3, 4}) {
            PirConfig pir;
            pir.bits = bits;
            pir.n_reads = 256;
            const auto cases = rbm::infer_dataset(crossbar, eb, test, pir, seed, 0);
            const auto report = analyzer::analyze(records, cases, pir);
            (bits == 3 ? err3 : err4).push_back(report.error_rate_percent());
        }
    }
    const double m3 = median(err3), m4 = median(err4);
    const double elapsed = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof buf, "median error 4-bit %.1f%%, 3-bit %.1f%% (chance 66.7%%), %.1f s", m4, m3,
                  elapsed);
    return {m4 < 20.0 && m3 >= m4 && elapsed < 120.0, buf};
}

Outcome energy() {
    Rng rng(808);
    std::vector<analyzer::DatasetRecord> records;
    std::vector<PirTestcase> cases;
    for (int k = 0; k < 100; ++k) {
        records.push_back({std::to_string(k), std::uniform_int_distribution<int>(0, 9)(rng)});
        cases.push_back(random_testcase(rng, 3, std::to_string(k)));
    }
    PirConfig cfg;
    cfg.bits = 3;
    const auto report = analyzer::analyze(records, cases, cfg);
    return {report.n_cases == 100 && report.energy_total_fj == 9075.0,
            "total " + text::format_double(report.energy_total_fj) + " fJ over " +
                std::to_string(report.n_cases) + " cases"};
}

double any_double(Rng& rng) {
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
        case 0: return uniform01(rng);
        case 1: return -log_uniform(rng, 1e-300, 1e300);
        case 2: return log_uniform(rng, 1e-300, 1e300);
        default: return static_cast<double>(std::uniform_int_distribution<int>(-1000, 1000)(rng));
    }
}

Outcome format_roundtrips(const fs::path& dir) {
    Rng rng(909);
    std::vector<PirTestcase> cases;
    for (int k = 0; k < 1000; ++k) {
        PirTestcase tc{"case-" + std::to_string(rng() % 100000), {}};
        std::vector<int> digits{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
        std::shuffle(digits.begin(), digits.end(), rng);
        const auto count = std::uniform_int_distribution<std::size_t>(0, 10)(rng);
        for (std::size_t d = 0; d < count; ++d) tc.neurons.push_back({digits[d], uniform01(rng)});
        cases.push_back(std::move(tc));
    }
    const auto printed = analyzer::format_pir_output(cases);
    if (analyzer::parse_pir_output(printed) != cases) return {false, "PIR output changed on re-read"};
    if (analyzer::format_pir_output(analyzer::parse_pir_output(printed)) != printed) {
        return {false, "PIR text changed on re-print"};
    }

    std::vector<sweep::SweepRow> rows;
    for (int k = 0; k < 1000; ++k) {
        rows.push_back({any_double(rng), any_double(rng), any_double(rng), any_double(rng),
                        static_cast<std::size_t>(rng() % 1000000)});
    }
    const auto path = dir / "roundtrip.csv";
    sweep::write_results(rows, path, std::vector<std::string>{"roundtrip"});
    if (sweep::parse_results(text::read_file(path)) != rows) return {false, "results CSV changed on re-read"};
    return {true, "1000 PIR cases and 1000 results rows identical after roundtrip"};
}

}  // namespace

int main() {
    const auto dir = fs::temp_directory_path() / ("pbitsim_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"barrier/anisotropy roundtrip", roundtrip},
        {"sigmoid/telegraph consistency", telegraph},
        {"barrier steepness", steepness},
        {"top-two judge oracle equivalence", judge_equivalence},
        {"netlist patching", netlist_patching},
        {"end-to-end determinism", [&] { return determinism(dir); }},
        {"desk-scale learning", learning},
        {"energy accounting", energy},
        {"format roundtrips", [&] { return format_roundtrips(dir); }},
    };

    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("[%s] %zu. %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
