#include "oracles.hpp"

#include "layerwise/dataset.hpp"
#include "layerwise/errors.hpp"
#include "layerwise/output_head.hpp"
#include "layerwise/rng.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace layerwise;
namespace fs = std::filesystem;

namespace {

fs::path write_file(const char* name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream(p, std::ios::trunc) << text;
    return p;
}

} // namespace

TEST_CASE("SplitMix64: reference stream") {
    // First outputs for seed 0, as published with the reference implementation.
    SplitMix64 g(0);
    CHECK(g.next() == 0xE220A8397B1DCDAFULL);
    CHECK(g.next() == 0x6E789E6AA1B965F4ULL);
    CHECK(g.next() == 0x06C45D188009454FULL);
}

TEST_CASE("load_csv: layout, header, errors") {
    const Matrix x{{1, 4}, {2, 5}};
    const Matrix t{{3, 6}};
    const Dataset plain = load_csv(write_file("lw_plain.csv", "1,2,3\n4,5,6"), 2, 1);
    CHECK(plain.inputs == x);
    CHECK(plain.targets == t);

    const Dataset headed = load_csv(write_file("lw_header.csv", "x1,x2,t\n1,2,3\n4,5,6\n"), 2, 1);
    CHECK(headed.inputs == x);
    CHECK(headed.targets == t);

    try {
        load_csv(write_file("lw_ragged.csv", "1,2,3\n4,5\n"), 2, 1);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
    CHECK_THROWS_AS(load_csv(write_file("lw_bad.csv", "1,2,3\n4,x,6\n"), 2, 1), ParseError);
    CHECK_THROWS_AS(load_csv(write_file("lw_nan.csv", "1,2,3\n4,nan,6\n"), 2, 1), ParseError);
    CHECK_THROWS_AS(load_csv(fs::temp_directory_path() / "lw_missing_file.csv", 2, 1), IoError);

    const Dataset inputs_only = load_csv(write_file("lw_inputs.csv", "1,2\n3,4\n"), 2, 0);
    CHECK(inputs_only.targets.rows() == 0);
    CHECK(inputs_only.targets.cols() == 2);
}

TEST_CASE("save_csv / load_csv round trip is exact") {
    SyntheticSpec spec;
    spec.inputs = 3;
    spec.samples = 50;
    const Dataset ds = make_synthetic(spec);
    const fs::path p = fs::temp_directory_path() / "lw_roundtrip.csv";
    save_csv(ds, p);
    const Dataset back = load_csv(p, 3, 1);
    CHECK(back.inputs == ds.inputs);
    CHECK(back.targets == ds.targets);
}

TEST_CASE("split: sizes, partition, determinism") {
    Dataset ds{Matrix(1, 10), Matrix(1, 10)};
    for (std::size_t i = 0; i < 10; ++i) ds.inputs(0, i) = static_cast<double>(i);

    const Split a = split(ds, 0.3, 42);
    const Split b = split(ds, 0.3, 42);
    CHECK(a.train.samples() == 7);
    CHECK(a.test.samples() == 3);
    CHECK(a.train.inputs == b.train.inputs);
    CHECK(a.test.inputs == b.test.inputs);

    std::set<double> seen;
    for (double v : a.train.inputs.values()) seen.insert(v);
    for (double v : a.test.inputs.values()) CHECK(seen.insert(v).second);
    CHECK(seen.size() == 10);

    Dataset three{Matrix(1, 3), Matrix(1, 3)};
    const Split half = split(three, 0.5, 1);
    CHECK(half.train.samples() == 2);
    CHECK(half.test.samples() == 1);

    CHECK_THROWS_AS(split(Dataset{Matrix(1, 1), Matrix(1, 1)}, 0.5, 1), TooFewSamples);
    CHECK_THROWS_AS(split(ds, 1.0, 1), InvalidArgument);
}

TEST_CASE("make_synthetic: determinism and realizability") {
    SyntheticSpec lin;
    lin.inputs = 4;
    lin.samples = 2000;
    lin.seed = 42;
    lin.kind = SyntheticKind::Linear;
    const Dataset a = make_synthetic(lin);
    const Dataset b = make_synthetic(lin);
    CHECK(a.inputs == b.inputs);
    CHECK(a.targets == b.targets);
    CHECK(max_abs(a.inputs) <= 1.0);
    CHECK(mean_sq_error(solve_head(a.inputs, a.targets), a.inputs, a.targets) < 1e-20);

    SyntheticSpec nl = lin;
    nl.kind = SyntheticKind::Nonlinear;
    const Dataset c = make_synthetic(nl);
    CHECK(c.inputs == a.inputs);
    CHECK(mean_sq_error(solve_head(c.inputs, c.targets), c.inputs, c.targets) > 0.01);

    CHECK_THROWS_AS(make_synthetic(SyntheticSpec{1, 100, 1, SyntheticKind::Linear}), InvalidArgument);
    CHECK_THROWS_AS(make_synthetic(SyntheticSpec{3, 9, 1, SyntheticKind::Linear}), InvalidArgument);
}
