#include "pbitsim/analyzer.hpp"

#include "pbitsim/errors.hpp"
#include "pbitsim/text_io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pbitsim::analyzer {

std::vector<PirTestcase> parse_pir_output(std::string_view text) {
    std::vector<PirTestcase> cases;
    std::set<int> digits_seen;
    const auto all = text::lines(text);
    for (std::size_t n = 0; n < all.size(); ++n) {
        const auto line = all[n];
        if (text::trim(line).empty() || line.front() == '#') continue;
        const auto fields = text::split_whitespace(line);
        if (fields[0] == "testcase") {
            if (fields.size() != 2) throw ParseError("expected 'testcase <id>'", n + 1);
            cases.push_back({std::string(fields[1]), {}});
            digits_seen.clear();
            continue;
        }
        if (cases.empty()) throw ParseError("neuron line before any testcase header", n + 1);
        if (fields.size() != 2) throw ParseError("expected '<digit> <probability>'", n + 1);
        const auto digit = text::parse_int(fields[0]);
        const auto prob = text::parse_double(fields[1]);
        if (!digit || *digit < 0 || *digit > 9) throw ParseError("digit must be 0..9", n + 1);
        if (!prob || !(*prob >= 0.0 && *prob <= 1.0)) {
            throw ParseError("probability must lie in [0, 1]", n + 1);
        }
        if (!digits_seen.insert(static_cast<int>(*digit)).second) {
            throw ParseError("duplicate digit " + std::to_string(*digit) + " in testcase " +
                                 cases.back().case_id,
                             n + 1);
        }
        cases.back().neurons.push_back({static_cast<int>(*digit), *prob});
    }
    return cases;
}

std::string format_pir_output(std::span<const PirTestcase> cases,
                              std::span<const std::string> stamp) {
    std::string out;
    for (const auto& s : stamp) out += "# " + s + "\n";
    for (const auto& tc : cases) {
        out += "testcase " + tc.case_id + "\n";
        for (const auto& nr : tc.neurons) {
            out += std::to_string(nr.digit) + " " + text::format_double(nr.probability) + "\n";
        }
    }
    return out;
}

std::string_view to_string(Verdict v) { return v == Verdict::Pass ? "pass" : "fail"; }

std::string_view to_string(Reason r) {
    switch (r) {
        case Reason::Pass: return "pass";
        case Reason::NotInTopTwo: return "not-in-top-two";
        case Reason::TieBeyondTopTwo: return "tie-beyond-top-two";
    }
    return "unknown";
}

Judgment judge_testcase(int expected, const PirTestcase& testcase) {
    Judgment j{testcase.case_id, expected, Verdict::Fail, Reason::NotInTopTwo, false};
    j.expected_absent = std::none_of(testcase.neurons.begin(), testcase.neurons.end(),
                                     [&](const PirNeuron& n) { return n.digit == expected; });
    if (testcase.neurons.size() < 2) return j;

    auto ranked = testcase.neurons;
    std::stable_sort(ranked.begin(), ranked.end(), [](const PirNeuron& a, const PirNeuron& b) {
        if (a.probability != b.probability) return a.probability > b.probability;
        return a.digit < b.digit;
    });

    if (ranked[0].digit != expected && ranked[1].digit != expected) return j;
    const double boundary = ranked[1].probability;
    const bool tie = std::any_of(ranked.begin() + 2, ranked.end(),
                                 [&](const PirNeuron& n) { return n.probability == boundary; });
    if (tie) {
        j.reason = Reason::TieBeyondTopTwo;
        return j;
    }
    j.verdict = Verdict::Pass;
    j.reason = Reason::Pass;
    return j;
}

std::vector<DatasetRecord> parse_dataset_labels(std::string_view text) {
    std::vector<DatasetRecord> out;
    bool first_record = true;
    const auto all = text::lines(text);
    for (std::size_t n = 0; n < all.size(); ++n) {
        const auto line = text::trim(all[n]);
        if (line.empty() || line.front() == '#') continue;
        const auto label = text::parse_int(text::trim(line.substr(0, line.find(','))));
        if (!label) {
            if (first_record) {
                first_record = false;
                continue;
            }
            throw ParseError("label is not an integer", n + 1);
        }
        first_record = false;
        if (*label < 0 || *label > 9) throw ParseError("label must be a digit 0..9", n + 1);
        out.push_back({std::to_string(out.size()), static_cast<int>(*label)});
    }
    return out;
}

double AnalysisReport::error_rate_percent() const {
    return n_cases == 0 ? 0.0 : 100.0 * static_cast<double>(n_fail) / static_cast<double>(n_cases);
}

double AnalysisReport::pass_rate_percent() const {
    return n_cases == 0 ? 0.0 : 100.0 * static_cast<double>(n_pass) / static_cast<double>(n_cases);
}

AnalysisReport analyze(std::span<const DatasetRecord> dataset, std::span<const PirTestcase> pir,
                       const PirConfig& config) {
    AnalysisReport report;
    report.bits = config.bits;
    report.energy_per_testcase_fj = config.energy_fj();
    const std::size_t n = std::min(dataset.size(), pir.size());
    report.per_case.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (dataset[k].case_id != pir[k].case_id) {
            throw MismatchError("testcase mismatch at position " + std::to_string(k) +
                                ": dataset id '" + dataset[k].case_id + "' vs PIR id '" +
                                pir[k].case_id + "'");
        }
        auto j = judge_testcase(dataset[k].expected, pir[k]);
        (j.verdict == Verdict::Pass ? report.n_pass : report.n_fail) += 1;
        report.per_case.push_back(std::move(j));
    }
    report.n_cases = n;
    report.energy_total_fj = static_cast<double>(n) * report.energy_per_testcase_fj;
    return report;
}

EnergyTable parse_energy_table(std::string_view text) {
    EnergyTable table;
    const auto all = text::lines(text);
    for (std::size_t n = 0; n < all.size(); ++n) {
        auto line = std::string(text::trim(all[n]));
        if (line.empty() || line.front() == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        const auto fields = text::split_whitespace(line);
        if (fields.size() != 2) throw ParseError("expected '<bits> <femtojoules>'", n + 1);
        const auto bits = text::parse_int(fields[0]);
        const auto fj = text::parse_double(fields[1]);
        if (!bits || *bits < 1) throw ParseError("bits must be a positive integer", n + 1);
        if (!fj || !std::isfinite(*fj) || *fj < 0.0) throw ParseError("energy must be >= 0", n + 1);
        table[static_cast<int>(*bits)] = *fj;
    }
    if (table.empty()) throw EmptyInputError("energy table has no entries");
    return table;
}

std::string format_report_json(const AnalysisReport& report, std::string_view stamp) {
    nlohmann::ordered_json j;
    if (!stamp.empty()) j["generated_by"] = stamp;
    j["n_cases"] = report.n_cases;
    j["n_pass"] = report.n_pass;
    j["n_fail"] = report.n_fail;
    j["error_rate_percent"] = report.error_rate_percent();
    j["pir_bits"] = report.bits;
    j["energy_per_testcase_fj"] = report.energy_per_testcase_fj;
    j["energy_total_fj"] = report.energy_total_fj;
    auto& cases = j["per_case"] = nlohmann::ordered_json::array();
    for (const auto& c : report.per_case) {
        cases.push_back({{"case_id", c.case_id},
                         {"expected", c.expected_digit},
                         {"verdict", to_string(c.verdict)},
                         {"reason", to_string(c.reason)},
                         {"expected_absent", c.expected_absent}});
    }
    return j.dump(2) + "\n";
}

}  // namespace pbitsim::analyzer
