#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <netchar/errors.hpp>
#include <netchar/serialization.hpp>

#include "support/fixtures.hpp"

#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

using namespace netchar;
using namespace netchar::testing;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test case, cleaned up on destruction.
struct Scratch {
    fs::path dir;
    Scratch() {
        static int counter = 0;
        dir = fs::temp_directory_path() /
              ("netchar_io_test_" + std::to_string(++counter) + "_" +
               std::to_string(static_cast<unsigned>(::getpid())));
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    fs::path operator/(const std::string& name) const { return dir / name; }
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

} // namespace

TEST_CASE("transfer matrices round-trip through JSON") {
    Scratch scratch;
    const linalg::Matrix m = random_per_input_loss(4, 77);
    const TransferMatrix net(m);
    io::save_transfer_matrix(scratch / "net.json", net);
    const TransferMatrix loaded = io::load_transfer_matrix(scratch / "net.json");
    CHECK(linalg::max_abs_diff(loaded.matrix(), m) < 1e-15);
}

TEST_CASE("matrix loading reports the failure class precisely") {
    Scratch scratch;
    CHECK_THROWS_AS(io::load_transfer_matrix(scratch / "missing.json"), io_error);

    write_text(scratch / "garbage.json", "not json at all {{{");
    CHECK_THROWS_AS(io::load_transfer_matrix(scratch / "garbage.json"), io_error);

    write_text(scratch / "incomplete.json", R"({"n": 2, "re": [[1, 0], [0, 1]]})");
    CHECK_THROWS_AS(io::load_transfer_matrix(scratch / "incomplete.json"), validation_error);

    write_text(scratch / "ragged.json",
               R"({"n": 2, "re": [[1, 0, 0], [0, 1]], "im": [[0, 0], [0, 0]]})");
    CHECK_THROWS_AS(io::load_transfer_matrix(scratch / "ragged.json"), validation_error);

    write_text(scratch / "amplifying.json",
               R"({"n": 1, "re": [[1.5]], "im": [[0]]})");
    CHECK_THROWS_AS(io::load_transfer_matrix(scratch / "amplifying.json"), validation_error);
}

TEST_CASE("a stored noise floor widens the physicality slack on load") {
    Scratch scratch;
    nlohmann::json j;
    j["n"] = 1;
    j["re"] = {{1.003}};
    j["im"] = {{0.0}};
    io::save_json(scratch / "tight.json", j);
    CHECK_THROWS_AS(io::load_transfer_matrix(scratch / "tight.json"), validation_error);

    j["noise_floor_rel"] = 0.01;
    io::save_json(scratch / "slack.json", j);
    CHECK_NOTHROW(io::load_transfer_matrix(scratch / "slack.json"));
}

TEST_CASE("measurement records round-trip bit-exactly inline") {
    Scratch scratch;
    const TransferMatrix net(random_per_input_loss(3, 5));
    const MeasurementRecord record = execute_plan(net, 2.0, SweepConfig{}, noisy(0.01, 0.005, 9));

    io::save_record(scratch / "rec.json", record);
    const MeasurementRecord loaded = io::load_record(scratch / "rec.json");

    CHECK(loaded.n == record.n);
    CHECK(loaded.noise.seed == record.noise.seed);
    CHECK(loaded.noise.intensity_sigma == record.noise.intensity_sigma);
    for (std::size_t j = 0; j < record.n; ++j)
        for (std::size_t k = 0; k < record.n; ++k)
            CHECK(loaded.singles[j].intensities[k] == record.singles[j].intensities[k]);
    for (std::size_t t = 0; t < record.traces.size(); ++t) {
        CHECK((loaded.traces[t].phi - record.traces[t].phi).cwiseAbs().maxCoeff() == 0.0);
        CHECK((loaded.traces[t].intensity - record.traces[t].intensity).cwiseAbs().maxCoeff() ==
              0.0);
    }
}

TEST_CASE("records can reference fringe CSV files instead of inlining") {
    Scratch scratch;
    const TransferMatrix net(random_per_input_loss(3, 6));
    const MeasurementRecord record = execute_plan(net, 1.0, SweepConfig{}, noisy(0.02, 0.0, 4));

    io::save_record(scratch / "rec.json", record, nlohmann::json::object(), "rec");
    CHECK(fs::exists(scratch / "rec_trace2.csv"));
    CHECK(fs::exists(scratch / "rec_trace3.csv"));

    const MeasurementRecord loaded = io::load_record(scratch / "rec.json");
    for (std::size_t t = 0; t < record.traces.size(); ++t) {
        CHECK((loaded.traces[t].phi - record.traces[t].phi).cwiseAbs().maxCoeff() < 1e-13);
        CHECK((loaded.traces[t].intensity - record.traces[t].intensity).cwiseAbs().maxCoeff() <
              1e-13);
    }
}

TEST_CASE("fringe CSV parsing rejects malformed inputs") {
    Scratch scratch;
    FringeTrace trace;

    CHECK_THROWS_AS(io::read_fringe_csv(scratch / "missing.csv", trace), io_error);

    write_text(scratch / "header.csv", "time,ch1,ch2\n0,1,2\n");
    CHECK_THROWS_AS(io::read_fringe_csv(scratch / "header.csv", trace), validation_error);

    write_text(scratch / "columns.csv", "phi,ch1,ch3\n0,1,2\n");
    CHECK_THROWS_AS(io::read_fringe_csv(scratch / "columns.csv", trace), validation_error);

    write_text(scratch / "ragged.csv", "phi,ch1,ch2\n0,1\n");
    CHECK_THROWS_AS(io::read_fringe_csv(scratch / "ragged.csv", trace), validation_error);

    write_text(scratch / "alpha.csv", "phi,ch1,ch2\n0,one,2\n");
    CHECK_THROWS_AS(io::read_fringe_csv(scratch / "alpha.csv", trace), io_error);
}

TEST_CASE("record loading validates the protocol shape") {
    Scratch scratch;
    const TransferMatrix net(dft(2));
    MeasurementRecord record = execute_plan(net, 1.0, SweepConfig{}, quiet());
    record.singles.pop_back();
    // Writing does not validate shape, loading does.
    io::save_record(scratch / "short.json", record);
    CHECK_THROWS_AS(io::load_record(scratch / "short.json"), validation_error);
}

TEST_CASE("characterization results load back as transfer matrices") {
    Scratch scratch;
    const TransferMatrix net(random_per_input_loss(3, 8));
    const CharacterizationResult result =
        characterize(execute_plan(net, 1.0, SweepConfig{}, noisy(0.01, 0.0, 2)));
    io::save_characterization(scratch / "result.json", result);

    const TransferMatrix loaded = io::load_transfer_matrix(scratch / "result.json");
    CHECK(linalg::max_abs_diff(loaded.matrix(), result.matrix.matrix()) < 1e-15);
}

TEST_CASE("embeddings serialize with their diagnostics") {
    Scratch scratch;
    const linalg::Matrix m = random_path_dependent_loss(3, 12);
    const LossEmbedding emb = embed_lossy(TransferMatrix(m), 1e-3);
    const UnitaryFit fit = closest_unitary(emb.dilation);
    io::save_embedding(scratch / "emb.json", emb, &fit);

    const nlohmann::json j = io::load_json(scratch / "emb.json");
    CHECK(j.at("eta").size() == 3);
    CHECK(j.at("dilation").at("n").get<int>() == 6);
    CHECK(j.at("balanced_deviation").get<double>() == doctest::Approx(emb.balanced_deviation));
    CHECK(j.at("unitary_distance").get<double>() == doctest::Approx(fit.distance));
    const linalg::Matrix u = io::matrix_from_json(j.at("closest_unitary"));
    CHECK(linalg::deviation_from_unitarity(u) < 1e-10);
}

TEST_CASE("saving is atomic enough to never leave a temp file behind") {
    Scratch scratch;
    nlohmann::json j;
    j["n"] = 1;
    j["re"] = {{0.5}};
    j["im"] = {{0.0}};
    io::save_json(scratch / "out.json", j);
    CHECK(fs::exists(scratch / "out.json"));
    CHECK_FALSE(fs::exists(scratch / "out.json.tmp"));
}
