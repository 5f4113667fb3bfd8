#pragma once

// Top-two accuracy analysis of PIR outputs against a labelled dataset.
//
// A testcase passes when the expected digit ranks first or second by
// probability and no neuron ranked third or lower has a probability equal
// to the second-ranked one; such a tie means the recorder could not
// separate the top two from the rest.

#include "pbitsim/pir.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pbitsim::analyzer {

/// Grammar (LF lines): "testcase <id>" header, then "<digit> <probability>"
/// neuron lines until the next header. Blank and '#' lines are ignored.
/// Throws ParseError for a neuron line before any header, a duplicate
/// digit within a case, or a probability outside [0, 1].
std::vector<PirTestcase> parse_pir_output(std::string_view text);

std::string format_pir_output(std::span<const PirTestcase> cases,
                              std::span<const std::string> stamp = {});

enum class Verdict { Pass, Fail };
enum class Reason { Pass, NotInTopTwo, TieBeyondTopTwo };

std::string_view to_string(Verdict v);
std::string_view to_string(Reason r);

struct Judgment {
    std::string case_id;
    int expected_digit = 0;
    Verdict verdict = Verdict::Fail;
    Reason reason = Reason::NotInTopTwo;
    /// The expected digit had no neuron line at all (reason NotInTopTwo).
    bool expected_absent = false;

    friend bool operator==(const Judgment&, const Judgment&) = default;
};

/// Sorts by probability descending, ties by ascending digit, then applies
/// the top-two rule. Cases with fewer than two neurons fail.
Judgment judge_testcase(int expected, const PirTestcase& testcase);

/// One dataset record: testcase id and expected digit.
struct DatasetRecord {
    std::string case_id;
    int expected = 0;
};

/// Labels of a "label,pix0,..." CSV; record k gets id "k". Only the first
/// column is read. '#' lines and a non-numeric header line are skipped.
std::vector<DatasetRecord> parse_dataset_labels(std::string_view text);

struct AnalysisReport {
    std::size_t n_cases = 0;
    std::size_t n_pass = 0;
    std::size_t n_fail = 0;
    int bits = 0;
    double energy_per_testcase_fj = 0.0;
    double energy_total_fj = 0.0;
    std::vector<Judgment> per_case;

    /// 100 * n_fail / n_cases; 0 when there are no cases.
    double error_rate_percent() const;
    double pass_rate_percent() const;
};

/// Pairs records in order and stops at the shorter input. Throws
/// MismatchError when paired ids differ.
AnalysisReport analyze(std::span<const DatasetRecord> dataset, std::span<const PirTestcase> pir,
                       const PirConfig& config);

/// Lines "<bits> <femtojoules>" (space or comma separated), '#' comments.
EnergyTable parse_energy_table(std::string_view text);

/// JSON report with keys n_cases, n_pass, n_fail, error_rate_percent,
/// energy_total_fj and per_case; `stamp` is stored under "generated_by".
std::string format_report_json(const AnalysisReport& report, std::string_view stamp = {});

}  // namespace pbitsim::analyzer
