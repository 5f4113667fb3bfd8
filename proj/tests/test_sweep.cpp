#include "doctest.h"

#include "pbitsim/errors.hpp"
#include "pbitsim/sweep.hpp"
#include "pbitsim/text_io.hpp"

#include <filesystem>
#include <random>
#include <unistd.h>

using namespace pbitsim;
using namespace pbitsim::sweep;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    auto dir = fs::temp_directory_path() / ("pbitsim_sweep_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

std::vector<double> kts(const std::vector<EnergyBarrier>& v) {
    std::vector<double> out;
    for (const auto& e : v) out.push_back(e.kt_multiple());
    return out;
}

SweepSpec internal_spec(std::vector<double> barriers_kt) {
    SweepSpec spec;
    for (double kt : barriers_kt) spec.barriers.push_back(EnergyBarrier::from_kt(kt));
    spec.v_grid = linspace(spec.elec.v_th, spec.elec.v_dd, 11);
    return spec;
}

}  // namespace

TEST_CASE("barrier list parsing") {
    CHECK(kts(parse_barrier_list("40\n45\n50\n")) == std::vector<double>{40, 45, 50});
    CHECK(kts(parse_barrier_list("# nominal\n40\n\n45\n")) == std::vector<double>{40, 45});
    CHECK(kts(parse_barrier_list("  12.5  \r\n")) == std::vector<double>{12.5});
    try {
        parse_barrier_list("forty\n");
        FAIL("expected parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
    }
    CHECK_THROWS_AS(parse_barrier_list("40\n-3\n"), ParseError);
    CHECK_THROWS_AS(parse_barrier_list("# only comments\n\n"), EmptyInputError);
}

TEST_CASE("linspace hits both ends and the centre exactly") {
    const auto g = linspace(0.5, 1.0, 11);
    REQUIRE(g.size() == 11);
    CHECK(g.front() == 0.5);
    CHECK(g[5] == 0.75);
    CHECK(g.back() == 1.0);
    CHECK(linspace(0.3, 0.3, 1) == std::vector<double>{0.3});
}

TEST_CASE("internal sweep") {
    auto spec = internal_spec({40, 45, 50});
    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 33);
    for (std::size_t b = 0; b < 3; ++b) {
        for (std::size_t k = 0; k < 11; ++k) {
            const auto& r = rows[b * 11 + k];
            CHECK(r.e_b_kt == spec.barriers[b].kt_multiple());
            CHECK(r.v_in == spec.v_grid[k]);
            CHECK(r.n_samples == 0);
        }
        CHECK(rows[b * 11 + 5].p_high == 0.5);
        CHECK(rows[b * 11].h_k == anisotropy_from_barrier(spec.barriers[b], spec.magnet.m_s,
                                                           spec.geometry.volume()));
    }

    SUBCASE("steeper sigmoid with larger barrier") {
        auto s = internal_spec({1, 2, 4, 8});
        const auto r = run_sweep(s);
        for (std::size_t k = 0; k < 11; ++k) {
            for (std::size_t b = 1; b < 4; ++b) {
                const auto& lo = r[(b - 1) * 11 + k];
                const auto& hi = r[b * 11 + k];
                if (hi.v_in > s.elec.v_mid()) CHECK(hi.p_high >= lo.p_high);
                if (hi.v_in < s.elec.v_mid()) CHECK(hi.p_high <= lo.p_high);
            }
        }
    }

    SUBCASE("thread count does not change sampled results") {
        auto s = internal_spec({1, 3, 5, 7, 9, 11});
        s.samples_per_point = 2000;
        s.seed = 77;
        s.threads = 1;
        const auto serial = run_sweep(s);
        s.threads = 4;
        CHECK(run_sweep(s) == serial);
        CHECK(serial.front().n_samples == 2000);
    }

    SUBCASE("invalid specs") {
        auto s = internal_spec({40});
        s.v_grid = {0.6, 0.6};
        CHECK_THROWS_AS(run_sweep(s), DomainError);
        s.v_grid.clear();
        CHECK_THROWS_AS(run_sweep(s), DomainError);
        s = internal_spec({});
        CHECK_THROWS_AS(run_sweep(s), DomainError);
    }
}

TEST_CASE("external sweep through a stub simulator") {
    const auto dir = scratch_dir();
    const auto deck = dir / "neuron.sp";
    text::write_file_atomic(deck, "* p-bit\n.param HK= 400\n.end\n");

    auto spec = internal_spec({20, 40});
    ExternalBackend ext;
    ext.netlist_template = deck;
    // echoes the patched HK value back as the output voltage
    ext.command_template = {"sh", "-c",
                            "hk=$(sed -n 's/.*HK= \\([^ ]*\\).*/\\1/p' \"$0\"); echo VOUT 0.75 $hk",
                            "{netlist}"};
    ext.work_prefix = dir / "patched";
    ext.log_prefix = dir / "sim";
    spec.external = ext;

    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 2);
    for (std::size_t b = 0; b < 2; ++b) {
        CHECK(rows[b].v_in == 0.75);
        CHECK(rows[b].p_high == doctest::Approx(rows[b].h_k).epsilon(1e-12));
        CHECK(fs::exists(dir / ("sim." + std::to_string(b) + ".log")));
    }

    SUBCASE("failure keeps earlier barriers") {
        auto failing = spec;
        failing.barriers.push_back(EnergyBarrier::from_kt(60));
        failing.external->command_template = {
            "sh", "-c", "grep -q 'HK= 1[0-9][0-9][0-9]\\.' \"$0\" && exit 2; echo VOUT 0.75 0.5",
            "{netlist}"};
        try {
            run_sweep(failing);
            FAIL("expected sweep error");
        } catch (const SweepError& e) {
            // 40 kT maps to roughly 1066 Oe, the first value matching the pattern
            CHECK(e.barrier_index() == 1);
            CHECK(e.barrier_kt() == 40);
            CHECK(e.partial_rows().size() == 1);
            CHECK(e.exit_code() == 3);
        }
    }
}

TEST_CASE("results file") {
    const auto dir = scratch_dir();
    const std::vector<SweepRow> one = {{40, 1065.6, 0.4, 0.5, 0}};
    write_results(one, dir / "one.csv");
    CHECK(text::read_file(dir / "one.csv") == "eb_kt,hk_oe,vin_v,p_high,n_samples\n40,1065.6,0.4,0.5,0\n");
    CHECK_THROWS_AS(write_results(std::vector<SweepRow>{}, dir / "empty.csv"), DomainError);
    CHECK_FALSE(fs::exists(dir / "empty.csv"));

    const std::vector<std::string> stamp = {"pbitsim test seed=1"};
    const auto text = format_results(one, stamp);
    CHECK(text.rfind("# pbitsim test seed=1\n", 0) == 0);
    CHECK(parse_results(text) == one);
    CHECK_THROWS_AS(parse_results("eb_kt,hk_oe,vin_v,p_high,n_samples\n1,2,3\n"), ParseError);
    CHECK_THROWS_AS(parse_results("a,b\n"), ParseError);
}
