#include "pbitsim/sweep.hpp"

#include "pbitsim/errors.hpp"
#include "pbitsim/text_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace pbitsim::sweep {
namespace {

std::vector<SweepRow> run_barrier(const SweepSpec& spec, std::size_t index, double h_k,
                                  const std::string* netlist_template) {
    const auto& e_b = spec.barriers[index];
    std::vector<spice::VoltagePoint> points;
    std::size_t n_samples = spec.samples_per_point;
    if (!spec.external) {
        auto rng = make_stream(spec.seed, index);
        points = spice::simulate_internal(e_b, spec.elec, spec.v_grid, spec.samples_per_point, rng,
                                          spec.magnet.attempt_rate);
    } else {
        const auto& ext = *spec.external;
        const auto suffix = "." + std::to_string(index);
        spice::SimJob job;
        job.netlist_path = ext.work_prefix;
        job.netlist_path += suffix + ".sp";
        job.log_path = ext.log_prefix;
        job.log_path += suffix + ".log";
        job.command_template = ext.command_template;
        job.output_marker = ext.output_marker;
        job.timeout = ext.timeout;
        text::write_file_atomic(job.netlist_path, spice::patch_anisotropy(*netlist_template, h_k));
        const auto run = spice::run_external(job);
        points = spice::extract_output_voltages(run.output, job.output_marker);
        n_samples = 0;
    }

    std::vector<SweepRow> rows;
    rows.reserve(points.size());
    for (const auto& p : points) {
        rows.push_back({e_b.kt_multiple(), h_k, p.v_in, p.p_high.value_or(p.v_out), n_samples});
    }
    return rows;
}

int exit_code_of(const std::exception_ptr& err) {
    try {
        std::rethrow_exception(err);
    } catch (const DataError&) {
        return 1;
    } catch (const std::exception&) {
        return 3;
    }
}

std::string message_of(const std::exception_ptr& err) {
    try {
        std::rethrow_exception(err);
    } catch (const std::exception& e) {
        return e.what();
    }
}

}  // namespace

std::vector<EnergyBarrier> parse_barrier_list(std::string_view text, double temperature) {
    std::vector<EnergyBarrier> out;
    const auto all = text::lines(text);
    for (std::size_t n = 0; n < all.size(); ++n) {
        const auto line = text::trim(all[n]);
        if (line.empty() || line.front() == '#') continue;
        const auto value = text::parse_double(line);
        if (!value) {
            throw ParseError("not a number: '" + std::string(line) + "'", n + 1);
        }
        if (!std::isfinite(*value) || *value < 0.0) {
            throw ParseError("energy barrier must be a finite value >= 0", n + 1);
        }
        out.push_back(EnergyBarrier::from_kt(*value, temperature));
    }
    if (out.empty()) throw EmptyInputError("barrier list has no entries");
    return out;
}

std::vector<double> linspace(double start, double stop, std::size_t steps) {
    if (steps == 0) throw DomainError("grid needs at least one point");
    if (steps == 1) return {start};
    std::vector<double> grid(steps);
    const double span = stop - start;
    const double denom = static_cast<double>(steps - 1);
    for (std::size_t k = 0; k < steps; ++k) {
        grid[k] = start + span * (static_cast<double>(k) / denom);
    }
    grid.back() = stop;
    return grid;
}

void SweepSpec::validate() const {
    if (barriers.empty()) throw DomainError("sweep needs at least one barrier");
    geometry.validate();
    magnet.validate();
    elec.validate();
    if (!external) {
        if (v_grid.empty()) throw DomainError("voltage grid is empty");
        for (std::size_t k = 1; k < v_grid.size(); ++k) {
            if (!(v_grid[k] > v_grid[k - 1])) {
                throw DomainError("voltage grid must be strictly increasing");
            }
        }
    } else {
        if (external->work_prefix.empty() || external->log_prefix.empty()) {
            throw DomainError("external backend needs work and log paths");
        }
        spice::SimJob probe;
        probe.command_template = external->command_template;
        probe.timeout = external->timeout;
        probe.validate();
    }
}

SweepError::SweepError(std::size_t barrier_index, double barrier_kt, std::vector<SweepRow> partial,
                       const std::string& cause, int exit_code)
    : std::runtime_error("barrier #" + std::to_string(barrier_index) + " (" +
                         text::format_double(barrier_kt) + " kT) failed: " + cause),
      index_(barrier_index),
      kt_(barrier_kt),
      partial_(std::move(partial)),
      exit_code_(exit_code) {}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    spec.validate();
    const std::size_t n = spec.barriers.size();
    const double volume = spec.geometry.volume();

    std::vector<double> h_k(n);
    for (std::size_t k = 0; k < n; ++k) {
        h_k[k] = anisotropy_from_barrier(spec.barriers[k], spec.magnet.m_s, volume);
    }
    std::string netlist_template;
    if (spec.external) netlist_template = text::read_file(spec.external->netlist_template);

    std::vector<std::vector<SweepRow>> per_barrier(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> first_failure{n};

    auto worker = [&] {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= n) return;
            if (k > first_failure.load()) continue;
            try {
                per_barrier[k] = run_barrier(spec, k, h_k[k], &netlist_template);
            } catch (...) {
                errors[k] = std::current_exception();
                std::size_t seen = first_failure.load();
                while (k < seen && !first_failure.compare_exchange_weak(seen, k)) {
                }
            }
        }
    };

    std::size_t threads = spec.threads == 0 ? std::thread::hardware_concurrency() : spec.threads;
    threads = std::clamp<std::size_t>(threads, 1, n);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    std::vector<SweepRow> rows;
    for (std::size_t k = 0; k < n; ++k) {
        if (errors[k]) {
            throw SweepError(k, spec.barriers[k].kt_multiple(), std::move(rows),
                             message_of(errors[k]), exit_code_of(errors[k]));
        }
        rows.insert(rows.end(), per_barrier[k].begin(), per_barrier[k].end());
    }
    return rows;
}

std::string format_results(std::span<const SweepRow> rows, std::span<const std::string> stamp) {
    std::string out;
    for (const auto& line : stamp) {
        out += "# ";
        out += line;
        out += '\n';
    }
    out += kResultsHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += text::format_double(r.e_b_kt);
        out += ',';
        out += text::format_double(r.h_k);
        out += ',';
        out += text::format_double(r.v_in);
        out += ',';
        out += text::format_double(r.p_high);
        out += ',';
        out += std::to_string(r.n_samples);
        out += '\n';
    }
    return out;
}

void write_results(std::span<const SweepRow> rows, const std::filesystem::path& path,
                   std::span<const std::string> stamp) {
    if (rows.empty()) throw DomainError("no result rows to write");
    text::write_file_atomic(path, format_results(rows, stamp));
}

std::vector<SweepRow> parse_results(std::string_view text) {
    std::vector<SweepRow> rows;
    bool header_seen = false;
    const auto all = text::lines(text);
    for (std::size_t n = 0; n < all.size(); ++n) {
        const auto line = all[n];
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != kResultsHeader) throw ParseError("unexpected results header", n + 1);
            header_seen = true;
            continue;
        }
        const auto f = text::split(line, ',');
        if (f.size() != 5) throw ParseError("expected 5 fields", n + 1);
        const auto eb = text::parse_double(f[0]);
        const auto hk = text::parse_double(f[1]);
        const auto vin = text::parse_double(f[2]);
        const auto p = text::parse_double(f[3]);
        const auto ns = text::parse_int(f[4]);
        if (!eb || !hk || !vin || !p || !ns || *ns < 0) {
            throw ParseError("malformed results row", n + 1);
        }
        rows.push_back({*eb, *hk, *vin, *p, static_cast<std::size_t>(*ns)});
    }
    if (!header_seen) throw ParseError("results header missing", 0);
    return rows;
}

}  // namespace pbitsim::sweep
