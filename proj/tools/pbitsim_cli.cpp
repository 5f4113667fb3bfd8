// pbitsim command line: sigmoid characterization, barrier sweeps, process
// variation sampling, RBM train/infer and top-two accuracy analysis.
//
// Exit codes: 0 ok, 1 data/model error, 2 usage error, 3 environment or
// simulator error.

#include "pbitsim/analyzer.hpp"
#include "pbitsim/device_model.hpp"
#include "pbitsim/errors.hpp"
#include "pbitsim/rbm.hpp"
#include "pbitsim/spice_bridge.hpp"
#include "pbitsim/sweep.hpp"
#include "pbitsim/text_io.hpp"
#include "pbitsim/version.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace pbitsim;

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;
constexpr int kExitEnvironment = 3;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string stamp_line(const std::string& subcommand, std::optional<std::uint64_t> seed) {
    std::string s = std::string("pbitsim ") + kVersion + " " + subcommand;
    if (seed) s += " seed=" + std::to_string(*seed);
    return s;
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        std::cout.flush();
    } else {
        text::write_file_atomic(path, content);
    }
}

// Device options shared by sigmoid, sweep and variation.
struct DeviceOptions {
    double temperature = kDefaultTemperatureK;
    double m_s = 1100.0;
    double attempt_rate = kDefaultAttemptRateHz;
    DeviceGeometry geometry;
    PbitElectrical elec;

    void add_to(CLI::App& app) {
        app.add_option("--temperature", temperature, "Temperature in K")->check(CLI::PositiveNumber);
        app.add_option("--ms", m_s, "Saturation magnetization, emu/cm^3")->check(CLI::PositiveNumber);
        app.add_option("--attempt-rate", attempt_rate, "Attempt frequency, 1/s")->check(CLI::PositiveNumber);
        app.add_option("--major", geometry.major_axis, "Free layer major axis, cm")->check(CLI::PositiveNumber);
        app.add_option("--minor", geometry.minor_axis, "Free layer minor axis, cm")->check(CLI::PositiveNumber);
        app.add_option("--thickness", geometry.free_layer_thickness, "Free layer thickness, cm")
            ->check(CLI::PositiveNumber);
        app.add_option("--vdd", elec.v_dd, "Supply voltage, V");
        app.add_option("--vth", elec.v_th, "NMOS threshold voltage, V");
    }

    MagnetParams magnet() const {
        MagnetParams m;
        m.m_s = m_s;
        m.temperature = temperature;
        m.attempt_rate = attempt_rate;
        return m;
    }

    void validate() const {
        try {
            elec.validate();
            geometry.validate();
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        }
    }
};

struct GridOptions {
    std::optional<double> start;
    std::optional<double> stop;
    std::size_t steps = 11;

    void add_to(CLI::App& app) {
        app.add_option("--vin-start", start, "First input voltage (default v_th)");
        app.add_option("--vin-stop", stop, "Last input voltage (default v_dd)");
        app.add_option("--vin-steps", steps, "Number of grid points")->check(CLI::PositiveNumber);
    }

    std::vector<double> grid(const PbitElectrical& elec) const {
        const double a = start.value_or(elec.v_th);
        const double b = stop.value_or(elec.v_dd);
        if (steps > 1 && !(b > a)) throw UsageError("--vin-stop must exceed --vin-start");
        return sweep::linspace(a, b, steps);
    }
};

// --- sigmoid ---------------------------------------------------------------

struct SigmoidCmd {
    std::vector<double> eb;
    std::string barriers_file;
    std::string mode = "exact";
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    std::string out;
    DeviceOptions dev;
    GridOptions grid;

    void add_to(CLI::App& app) {
        auto* sub = app.add_subcommand("sigmoid", "Activation curve p_high(v_in) for given barriers");
        sub->add_option("--eb", eb, "Energy barrier(s) in kT")->check(CLI::NonNegativeNumber);
        sub->add_option("--barriers", barriers_file, "Barrier list file (kT per line)");
        sub->add_option("--mode", mode, "exact or sampled")->check(CLI::IsMember({"exact", "sampled"}));
        sub->add_option("--samples", samples, "Telegraph steps per point in sampled mode")
            ->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Random seed");
        sub->add_option("--out", out, "Output CSV (stdout if omitted)");
        dev.add_to(*sub);
        grid.add_to(*sub);
        sub->callback([this] { run(); });
    }

    void run() {
        dev.validate();
        if (eb.empty() == barriers_file.empty()) {
            throw UsageError("give either --eb or --barriers");
        }
        sweep::SweepSpec spec;
        if (!eb.empty()) {
            for (double kt : eb) spec.barriers.push_back(EnergyBarrier::from_kt(kt, dev.temperature));
        } else {
            spec.barriers = sweep::parse_barrier_list(text::read_file(barriers_file), dev.temperature);
        }
        spec.magnet = dev.magnet();
        spec.geometry = dev.geometry;
        spec.elec = dev.elec;
        spec.v_grid = grid.grid(dev.elec);
        spec.samples_per_point = mode == "exact" ? spice::kExactSamples : samples;
        spec.seed = seed;
        const auto rows = sweep::run_sweep(spec);
        const std::vector<std::string> stamp = {stamp_line("sigmoid", seed)};
        emit(out, sweep::format_results(rows, stamp));
    }
};

// --- sweep -----------------------------------------------------------------

struct SweepCmd {
    std::string barriers_file;
    std::size_t samples = 0;
    std::uint64_t seed = 1;
    std::string backend = "internal";
    std::string netlist;
    std::string spice_cmd;
    std::string marker = "VOUT";
    std::string out;
    std::string log = "pbitsim_sim";
    double timeout_s = 60.0;
    std::size_t threads = 1;
    DeviceOptions dev;
    GridOptions grid;
    CLI::App* sub = nullptr;

    void add_to(CLI::App& app) {
        sub = app.add_subcommand("sweep", "Run the energy-barrier sweep");
        sub->add_option("--barriers", barriers_file, "Barrier list file (kT per line)")->required();
        sub->add_option("--samples", samples, "Telegraph steps per point; 0 = exact closed form");
        sub->add_option("--seed", seed, "Random seed");
        sub->add_option("--backend", backend, "internal or external")
            ->check(CLI::IsMember({"internal", "external"}));
        sub->add_option("--netlist", netlist, "SPICE netlist containing 'HK= <value>'");
        sub->add_option("--spice-cmd", spice_cmd, "Simulator command with {netlist} placeholder");
        sub->add_option("--marker", marker, "First field of simulator output lines to collect");
        sub->add_option("--out", out, "Results CSV (stdout if omitted)");
        sub->add_option("--log", log, "Prefix for per-barrier logs and patched netlists");
        sub->add_option("--timeout", timeout_s, "Simulator timeout in seconds")->check(CLI::PositiveNumber);
        sub->add_option("--threads", threads, "Worker threads, 0 = all cores");
        dev.add_to(*sub);
        grid.add_to(*sub);
        sub->callback([this] { run(); });
    }

    void run() {
        dev.validate();
        sweep::SweepSpec spec;
        spec.magnet = dev.magnet();
        spec.geometry = dev.geometry;
        spec.elec = dev.elec;
        spec.samples_per_point = samples;
        spec.seed = seed;
        spec.threads = threads;
        spec.v_grid = grid.grid(dev.elec);
        if (backend == "external") {
            if (netlist.empty() || spice_cmd.empty()) {
                throw UsageError("external backend needs --netlist and --spice-cmd");
            }
            sweep::ExternalBackend ext;
            ext.netlist_template = netlist;
            try {
                ext.command_template = spice::tokenize_command(spice_cmd);
                spice::SimJob probe;
                probe.command_template = ext.command_template;
                probe.validate();
            } catch (const DomainError& e) {
                throw UsageError(std::string("--spice-cmd: ") + e.what());
            }
            ext.work_prefix = log + ".netlist";
            ext.log_prefix = log;
            ext.output_marker = marker;
            ext.timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
            spec.external = ext;
        } else if (!netlist.empty() || !spice_cmd.empty()) {
            throw UsageError("--netlist/--spice-cmd require --backend external");
        }
        spec.barriers = sweep::parse_barrier_list(text::read_file(barriers_file), dev.temperature);
        const auto rows = sweep::run_sweep(spec);
        const std::vector<std::string> stamp = {stamp_line("sweep", seed)};
        emit(out, sweep::format_results(rows, stamp));
    }
};

// --- variation -------------------------------------------------------------

struct VariationCmd {
    double eb_nominal = 40.0;
    double sigma = 0.05;
    std::size_t n = 100;
    std::uint64_t seed = 1;
    std::string out;
    DeviceOptions dev;

    void add_to(CLI::App& app) {
        auto* sub = app.add_subcommand(
            "variation", "Sample barriers under Gaussian device-dimension variation; writes a barrier list");
        sub->add_option("--eb-nominal", eb_nominal, "Nominal barrier in kT")->check(CLI::PositiveNumber);
        sub->add_option("--sigma", sigma, "Relative std of each dimension, [0, 0.3)");
        sub->add_option("-n,--count", n, "Number of devices")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Random seed");
        sub->add_option("--out", out, "Barrier list output (stdout if omitted)");
        dev.add_to(*sub);
        sub->callback([this] { run(); });
    }

    void run() {
        dev.validate();
        if (!(sigma >= 0.0 && sigma < 0.3)) throw UsageError("--sigma must lie in [0, 0.3)");
        auto magnet = dev.magnet();
        magnet.h_k = anisotropy_from_barrier(EnergyBarrier::from_kt(eb_nominal, dev.temperature),
                                             magnet.m_s, dev.geometry.volume());
        Rng rng(seed);
        const auto barriers = sample_barriers(dev.geometry, magnet, sigma, n, rng);
        std::string text = "# " + stamp_line("variation", seed) + "\n";
        text += "# nominal " + text::format_double(eb_nominal) + " kT, hk " +
                text::format_double(magnet.h_k) + " Oe, sigma_rel " + text::format_double(sigma) + "\n";
        for (const auto& eb : barriers) text += text::format_double(eb.kt_multiple()) + "\n";
        emit(out, text);
    }
};

// --- gen-toy ---------------------------------------------------------------

struct GenToyCmd {
    std::size_t n = 300;
    int classes = 3;
    double noise = 0.15;
    std::uint64_t seed = 1;
    std::string out;

    void add_to(CLI::App& app) {
        auto* sub = app.add_subcommand("gen-toy", "Write a synthetic 8x8 pattern dataset CSV");
        sub->add_option("-n,--count", n, "Number of images")->check(CLI::PositiveNumber);
        sub->add_option("--classes", classes, "2 or 3")->check(CLI::Range(2, 3));
        sub->add_option("--noise", noise, "Pixel flip probability")->check(CLI::Range(0.0, 0.49));
        sub->add_option("--seed", seed, "Random seed");
        sub->add_option("--out", out, "Dataset CSV (stdout if omitted)");
        sub->callback([this] { run(); });
    }

    void run() {
        const auto samples = rbm::make_pattern_set(n, classes, noise, seed);
        emit(out, "# " + stamp_line("gen-toy", seed) + "\n" + rbm::format_dataset(samples));
    }
};

// --- train -----------------------------------------------------------------

struct TrainCmd {
    std::string dataset;
    std::string model;
    std::optional<std::size_t> labels;
    rbm::TrainConfig cfg{.hidden = 32, .epochs = 30, .learning_rate = 0.05, .batch_size = 10,
                         .label_units = 10, .seed = 1};

    void add_to(CLI::App& app) {
        auto* sub = app.add_subcommand("train", "Train a classification RBM with CD-1");
        sub->add_option("--dataset", dataset, "Training CSV label,pix0,...")->required();
        sub->add_option("--model", model, "Model output file")->required();
        sub->add_option("--hidden", cfg.hidden, "Hidden units")->check(CLI::PositiveNumber);
        sub->add_option("--epochs", cfg.epochs, "Epochs")->check(CLI::PositiveNumber);
        sub->add_option("--lr", cfg.learning_rate, "Learning rate")->check(CLI::PositiveNumber);
        sub->add_option("--batch", cfg.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
        sub->add_option("--labels", labels, "Label units (default: max label + 1)")
            ->check(CLI::Range(1, 10));
        sub->add_option("--seed", cfg.seed, "Random seed");
        sub->callback([this] { run(); });
    }

    void run() {
        const auto samples = rbm::parse_dataset(text::read_file(dataset));
        if (samples.empty()) throw EmptyInputError("training set is empty");
        int max_label = 0;
        for (const auto& s : samples) max_label = std::max(max_label, s.label);
        cfg.label_units = labels.value_or(static_cast<std::size_t>(max_label) + 1);
        const auto result = rbm::train_cd1(samples, cfg);
        std::vector<std::string> stamp = {stamp_line("train", cfg.seed)};
        stamp.push_back("reconstruction_error first " +
                        text::format_double(result.reconstruction_error.front()) + " last " +
                        text::format_double(result.reconstruction_error.back()));
        text::write_file_atomic(model, rbm::format_model(result.model, stamp));
        std::cerr << "trained " << samples.size() << " samples, reconstruction error "
                  << result.reconstruction_error.front() << " -> " << result.reconstruction_error.back()
                  << "\n";
    }
};

// --- infer -----------------------------------------------------------------

struct InferCmd {
    std::string model;
    std::string dataset;
    std::string out;
    double eb = 40.0;
    std::optional<double> eb_design;
    double gain = 0.3;
    double g_min = 1e-6;
    double g_max = 1e-4;
    double temperature = kDefaultTemperatureK;
    PirConfig pir;
    std::uint64_t seed = 1;
    std::size_t threads = 1;

    void add_to(CLI::App& app) {
        auto* sub = app.add_subcommand("infer", "p-bit inference through the crossbar; writes PIR output");
        sub->add_option("--model", model, "Model file")->required();
        sub->add_option("--dataset", dataset, "Test CSV label,pix0,...")->required();
        sub->add_option("--out", out, "PIR output (stdout if omitted)");
        sub->add_option("--eb", eb, "Device energy barrier in kT")->check(CLI::PositiveNumber);
        sub->add_option("--eb-design", eb_design,
                        "Barrier the sense resistance is sized for (default --eb)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--gain", gain, "Readout sigmoid gain relative to the trained model")
            ->check(CLI::PositiveNumber);
        sub->add_option("--g-min", g_min, "Minimum conductance, S")->check(CLI::PositiveNumber);
        sub->add_option("--g-max", g_max, "Maximum conductance, S")->check(CLI::PositiveNumber);
        sub->add_option("--temperature", temperature, "Temperature in K")->check(CLI::PositiveNumber);
        sub->add_option("--bits", pir.bits, "PIR precision")->check(CLI::Range(1, 30));
        sub->add_option("--reads", pir.n_reads, "Stochastic reads per testcase")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Random seed");
        sub->add_option("--threads", threads, "Worker threads, 0 = all cores");
        sub->callback([this] { run(); });
    }

    void run() {
        if (!(g_max > g_min)) throw UsageError("--g-max must exceed --g-min");
        // inference does not need energies; accept any precision
        pir.energy_per_testcase[pir.bits] = pir.energy_per_testcase.contains(pir.bits)
                                                ? pir.energy_per_testcase.at(pir.bits)
                                                : 0.0;
        const auto m = rbm::parse_model(text::read_file(model));
        const auto samples = rbm::parse_dataset(text::read_file(dataset));
        const auto device = EnergyBarrier::from_kt(eb, temperature);
        const auto design = EnergyBarrier::from_kt(eb_design.value_or(eb), temperature);
        const auto probe = rbm::map_weights(m, g_min, g_max, 1.0);
        const double r_sense = rbm::matched_sense_resistance(probe.weight_scale, g_min, g_max, design, gain);
        const auto crossbar = rbm::map_weights(m, g_min, g_max, r_sense);
        const auto cases = rbm::infer_dataset(crossbar, device, samples, pir, seed, threads);
        const std::vector<std::string> stamp = {
            stamp_line("infer", seed),
            "eb " + text::format_double(eb) + " kT, bits " + std::to_string(pir.bits) + ", reads " +
                std::to_string(pir.n_reads) + ", r_sense " + text::format_double(r_sense) + " ohm"};
        emit(out, analyzer::format_pir_output(cases, stamp));
    }
};

// --- analyze ---------------------------------------------------------------

struct AnalyzeCmd {
    std::string dataset;
    std::string pir_file;
    int bits = 4;
    std::string energy_table;
    std::string report;

    void add_to(CLI::App& app) {
        auto* sub = app.add_subcommand("analyze", "Top-two accuracy and energy of PIR output");
        sub->add_option("--dataset", dataset, "Dataset CSV (label column is read)")->required();
        sub->add_option("--pir", pir_file, "PIR output file")->required();
        sub->add_option("--bits", bits, "PIR precision used for the energy lookup")->check(CLI::Range(1, 30));
        sub->add_option("--energy-table", energy_table, "Lines '<bits> <fJ per testcase>'");
        sub->add_option("--report", report, "JSON report (stdout if omitted)");
        sub->callback([this] { run(); });
    }

    void run() {
        PirConfig cfg;
        cfg.bits = bits;
        if (!energy_table.empty()) {
            cfg.energy_per_testcase = analyzer::parse_energy_table(text::read_file(energy_table));
        }
        if (!cfg.energy_per_testcase.contains(bits)) {
            throw UsageError("no energy entry for " + std::to_string(bits) + " bits");
        }
        const auto records = analyzer::parse_dataset_labels(text::read_file(dataset));
        const auto cases = analyzer::parse_pir_output(text::read_file(pir_file));
        const auto result = analyzer::analyze(records, cases, cfg);
        emit(report, analyzer::format_report_json(result, stamp_line("analyze", std::nullopt)));
        std::cerr << result.n_pass << "/" << result.n_cases << " passed, error rate "
                  << result.error_rate_percent() << "%, energy " << result.energy_total_fj << " fJ\n";
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pbitsim: p-bit process-variation and RBM accuracy toolkit"};
    app.set_version_flag("--version", pbitsim::kVersion);
    app.require_subcommand(1);

    SigmoidCmd sigmoid;
    SweepCmd sweep_cmd;
    VariationCmd variation;
    GenToyCmd gen_toy;
    TrainCmd train;
    InferCmd infer;
    AnalyzeCmd analyze;
    sigmoid.add_to(app);
    sweep_cmd.add_to(app);
    variation.add_to(app);
    gen_toy.add_to(app);
    train.add_to(app);
    infer.add_to(app);
    analyze.add_to(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const pbitsim::sweep::SweepError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const pbitsim::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const pbitsim::EnvironmentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEnvironment;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEnvironment;
    }
    return 0;
}
