// Command-line front end for the network characterization pipeline:
//
//   netchar generate      make a seeded test network (matrix JSON)
//   netchar simulate      run the virtual bench, write a measurement record
//   netchar characterize  reconstruct the transfer matrix from a record
//   netchar verify        compare two-photon visibilities of two matrices
//   netchar embed         dilate a lossy matrix to a 2N-mode candidate unitary
//
// Exit codes: 0 success, 1 unexpected failure, 2 validation, 3 numerical,
// 4 I/O, 5 verify tolerance exceeded.

#include "netchar/characterization.hpp"
#include "netchar/errors.hpp"
#include "netchar/linalg.hpp"
#include "netchar/loss_embedding.hpp"
#include "netchar/network.hpp"
#include "netchar/serialization.hpp"
#include "netchar/virtual_lab.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace netchar;

#ifndef NETCHAR_VERSION
#define NETCHAR_VERSION "0.0.0"
#endif

namespace {

json make_manifest(const std::string& command) {
    json m;
    m["command"] = command;
    m["version"] = NETCHAR_VERSION;
    return m;
}

// out.json -> out_r03.json
fs::path repeat_path(const fs::path& base, std::size_t rep) {
    std::ostringstream suffix;
    suffix << "_r" << std::setw(2) << std::setfill('0') << rep;
    fs::path p = base;
    p.replace_filename(base.stem().string() + suffix.str() + base.extension().string());
    return p;
}

struct GenerateOptions {
    std::size_t n = 2;
    std::string loss = "lossless";
    std::uint64_t seed = 0;
    double eta = 0.8;
    std::vector<double> eta_list;
    std::string out;
};

int run_generate(const GenerateOptions& opt) {
    if (opt.n < 2)
        throw validation_error("generate: need at least 2 modes");

    // Per-mode transmissions for the lossy variants: explicit list if given,
    // otherwise seeded draws in [0.5, 0.95).
    std::vector<double> etas = opt.eta_list;
    if (etas.empty()) {
        std::mt19937_64 rng(derive_seed(opt.seed, 0xe7a));
        std::uniform_real_distribution<double> dist(0.5, 0.95);
        for (std::size_t j = 0; j < opt.n; ++j)
            etas.push_back(dist(rng));
    } else if (etas.size() != opt.n) {
        throw validation_error("generate: --eta-list needs exactly " + std::to_string(opt.n) +
                               " values");
    }
    for (double e : etas)
        if (e <= 0.0 || e > 1.0)
            throw validation_error("generate: transmissions must lie in (0, 1]");

    const auto n = static_cast<Eigen::Index>(opt.n);
    linalg::Matrix m;
    if (opt.loss == "lossless") {
        m = linalg::haar_random_unitary(n, opt.seed);
    } else if (opt.loss == "uniform") {
        if (opt.eta <= 0.0 || opt.eta > 1.0)
            throw validation_error("generate: --eta must lie in (0, 1]");
        m = opt.eta * linalg::haar_random_unitary(n, opt.seed);
    } else if (opt.loss == "per-input") {
        m = linalg::haar_random_unitary(n, opt.seed);
        for (Eigen::Index j = 0; j < n; ++j)
            m.row(j) *= etas[static_cast<std::size_t>(j)];
    } else if (opt.loss == "path-dependent") {
        // Attenuation buried between two unitary layers cannot be pulled out
        // as a per-input factor, which is exactly the hard case for the
        // dilation.
        const linalg::Matrix u1 = linalg::haar_random_unitary(n, derive_seed(opt.seed, 1));
        const linalg::Matrix u2 = linalg::haar_random_unitary(n, derive_seed(opt.seed, 2));
        linalg::Matrix d = linalg::Matrix::Zero(n, n);
        for (Eigen::Index j = 0; j < n; ++j)
            d(j, j) = etas[static_cast<std::size_t>(j)];
        m = u1 * d * u2;
    } else {
        throw validation_error("generate: unknown loss mode '" + opt.loss +
                               "' (lossless|uniform|per-input|path-dependent)");
    }

    TransferMatrix net(m);
    json manifest = make_manifest("generate");
    manifest["n"] = opt.n;
    manifest["loss"] = opt.loss;
    manifest["seed"] = opt.seed;
    if (opt.loss == "uniform")
        manifest["eta"] = opt.eta;
    if (opt.loss == "per-input" || opt.loss == "path-dependent")
        manifest["eta_list"] = etas;
    manifest["output"] = opt.out;

    json extra;
    extra["manifest"] = manifest;
    io::save_transfer_matrix(opt.out, net, extra);

    std::cout << "generated " << opt.n << "-mode " << opt.loss << " network -> " << opt.out
              << " (deviation from unitarity "
              << linalg::deviation_from_unitarity(net.matrix()) << ")\n";
    return 0;
}

struct SimulateOptions {
    std::string matrix;
    std::string out;
    std::uint64_t seed = 0;
    double noise_intensity = 0.0;
    double noise_phase = 0.0;
    std::vector<double> gain;
    std::vector<double> offset;
    std::size_t samples = 512;
    double sweep_periods = 2.5;
    double probe_intensity = 1.0;
    std::size_t repeat = 1;
    bool inline_traces = false;
};

int run_simulate(const SimulateOptions& opt) {
    if (opt.repeat < 1)
        throw validation_error("simulate: --repeat must be at least 1");
    const TransferMatrix net = io::load_transfer_matrix(opt.matrix);

    SweepConfig sweep;
    sweep.samples = opt.samples;
    sweep.periods = opt.sweep_periods;

    NoiseModel noise;
    noise.intensity_sigma = opt.noise_intensity;
    noise.phase_jitter_sigma = opt.noise_phase;
    noise.gain = opt.gain;
    noise.offset = opt.offset;

    for (std::size_t rep = 1; rep <= opt.repeat; ++rep) {
        noise.seed = opt.repeat == 1 ? opt.seed : derive_seed(opt.seed, 0x5eed0000 + rep);
        const MeasurementRecord record =
            execute_plan(net, opt.probe_intensity, sweep, noise);

        const fs::path out = opt.repeat == 1 ? fs::path(opt.out) : repeat_path(opt.out, rep);

        json manifest = make_manifest("simulate");
        manifest["matrix"] = opt.matrix;
        manifest["output"] = out.string();
        manifest["seed"] = opt.seed;
        manifest["record_seed"] = noise.seed;
        manifest["repeat_index"] = rep;
        manifest["repeat_total"] = opt.repeat;
        manifest["noise"] = {{"intensity_sigma", noise.intensity_sigma},
                             {"phase_jitter_sigma", noise.phase_jitter_sigma}};
        manifest["sweep"] = {{"samples", sweep.samples}, {"periods", sweep.periods}};
        manifest["probe_intensity"] = opt.probe_intensity;

        io::save_record(out, record, manifest,
                        opt.inline_traces ? std::string() : out.stem().string());
        std::cout << "simulated " << record.singles.size() + record.traces.size()
                  << " configurations -> " << out.string() << "\n";
    }
    return 0;
}

struct CharacterizeOptions {
    std::string record;
    std::string out;
    std::size_t repeat = 1;
    std::string plot_dir;
};

void write_fit_plots(const fs::path& dir, const MeasurementRecord& record,
                     const CharacterizationResult& result) {
    fs::create_directories(dir);
    for (std::size_t t = 0; t < record.traces.size(); ++t) {
        const FringeTrace& trace = record.traces[t];
        const TraceDiagnostics& diag = result.diagnostics[t];
        for (std::size_t k = 0; k < trace.channels(); ++k) {
            const ChannelDiagnostics& c = diag.channels[k];
            std::ostringstream csv;
            csv << std::setprecision(17) << "phi,measured,fitted\n";
            for (Eigen::Index i = 0; i < trace.phi.size(); ++i) {
                const double phi = trace.phi(i);
                const double fitted = c.mean + c.amplitude * std::cos(phi + c.phase);
                csv << phi << "," << trace.intensity(static_cast<Eigen::Index>(k), i) << ","
                    << fitted << "\n";
            }
            std::ostringstream name;
            name << "fit_in" << (trace.paired_input + 1) << "_ch" << (k + 1) << ".csv";
            std::ofstream out(dir / name.str(), std::ios::binary | std::ios::trunc);
            if (!out)
                throw io_error("cannot open '" + (dir / name.str()).string() + "' for writing");
            out << csv.str();
        }
    }
}

// Spread of angles across repeats: circular standard deviation, capped at
// the uniform-distribution value so it stays finite for scattered phases.
double circular_std(const std::vector<double>& angles) {
    std::complex<double> mean(0.0, 0.0);
    for (double a : angles)
        mean += std::polar(1.0, a);
    mean /= static_cast<double>(angles.size());
    const double r = std::abs(mean);
    const double cap = std::numbers::pi / std::sqrt(3.0);
    if (r <= 1e-12)
        return cap;
    return std::min(std::sqrt(-2.0 * std::log(r)), cap);
}

int run_characterize(const CharacterizeOptions& opt) {
    if (opt.repeat < 1)
        throw validation_error("characterize: --repeat must be at least 1");

    std::vector<fs::path> inputs;
    if (opt.repeat == 1) {
        inputs.emplace_back(opt.record);
    } else {
        for (std::size_t rep = 1; rep <= opt.repeat; ++rep)
            inputs.push_back(repeat_path(opt.record, rep));
    }

    std::vector<CharacterizationResult> results;
    results.reserve(inputs.size());
    MeasurementRecord first_record;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        MeasurementRecord record = io::load_record(inputs[i]);
        try {
            results.push_back(characterize(record));
        } catch (const validation_error& e) {
            throw validation_error(std::string(e.what()) + " [record '" + inputs[i].string() +
                                   "']");
        } catch (const numerical_error& e) {
            throw numerical_error(std::string(e.what()) + " [record '" + inputs[i].string() +
                                  "']");
        }
        if (i == 0)
            first_record = std::move(record);
    }

    const CharacterizationResult& primary = results.front();

    json manifest = make_manifest("characterize");
    manifest["record"] = opt.record;
    manifest["output"] = opt.out;
    manifest["repeat"] = opt.repeat;

    // The saved result is the first run; with repeats, the batch section
    // adds the run-to-run scatter per element, the empirical counterpart of
    // the reported error bars.
    io::save_characterization(opt.out, primary, manifest);
    if (opt.repeat > 1) {
        json j = io::load_json(opt.out);
        const auto n = static_cast<std::size_t>(primary.matrix.modes());
        json mod_sigma = json::array();
        json phase_sigma = json::array();
        for (std::size_t jj = 0; jj < n; ++jj) {
            json mrow = json::array();
            json prow = json::array();
            for (std::size_t kk = 0; kk < n; ++kk) {
                std::vector<double> mods, phases;
                for (const CharacterizationResult& r : results) {
                    mods.push_back(r.matrix.modulus(static_cast<Eigen::Index>(jj),
                                                    static_cast<Eigen::Index>(kk)));
                    phases.push_back(r.matrix.phase(static_cast<Eigen::Index>(jj),
                                                    static_cast<Eigen::Index>(kk)));
                }
                double mean = 0.0;
                for (double v : mods)
                    mean += v;
                mean /= static_cast<double>(mods.size());
                double var = 0.0;
                for (double v : mods)
                    var += (v - mean) * (v - mean);
                var /= static_cast<double>(mods.size() - 1);
                mrow.push_back(std::sqrt(var));
                prow.push_back(circular_std(phases));
            }
            mod_sigma.push_back(std::move(mrow));
            phase_sigma.push_back(std::move(prow));
        }
        j["batch"] = {{"runs", opt.repeat},
                      {"modulus_empirical_sigma", std::move(mod_sigma)},
                      {"phase_empirical_sigma", std::move(phase_sigma)}};
        io::save_json(opt.out, j);
    }

    if (!opt.plot_dir.empty())
        write_fit_plots(opt.plot_dir, first_record, results.front());

    std::size_t indeterminate = 0;
    for (const auto& row : primary.indeterminate)
        for (bool b : row)
            indeterminate += b ? 1 : 0;
    std::cout << "characterized " << primary.matrix.modes() << "-mode network -> " << opt.out
              << " (noise floor " << primary.noise_floor_rel << ", " << indeterminate
              << " indeterminate phases)\n";
    return 0;
}

struct VerifyOptions {
    std::string matrix_a;
    std::string matrix_b;
    std::vector<std::string> pairs;
    double tolerance = -1.0;
    std::string out;
};

std::vector<std::pair<Eigen::Index, Eigen::Index>> parse_pairs(const VerifyOptions& opt,
                                                               Eigen::Index n) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    if (opt.pairs.empty()) {
        // Defaults target inputs {1,3} and {1,6}, dropped when the network
        // has too few modes; the smallest networks fall back to {1,2}.
        const std::vector<std::pair<Eigen::Index, Eigen::Index>> preferred = {{0, 2}, {0, 5}};
        for (auto [i, j] : preferred)
            if (j < n)
                pairs.emplace_back(i, j);
        if (pairs.empty())
            pairs.emplace_back(0, 1);
        return pairs;
    }
    for (const std::string& spec : opt.pairs) {
        const auto comma = spec.find(',');
        if (comma == std::string::npos)
            throw validation_error("verify: --pair wants 'i,j' with 1-based modes, got '" +
                                   spec + "'");
        long i = 0, j = 0;
        try {
            i = std::stol(spec.substr(0, comma));
            j = std::stol(spec.substr(comma + 1));
        } catch (const std::exception&) {
            throw validation_error("verify: cannot parse --pair '" + spec + "'");
        }
        if (i < 1 || j < 1 || i > n || j > n)
            throw validation_error("verify: --pair '" + spec + "' is out of range for " +
                                   std::to_string(n) + " modes");
        if (i == j)
            throw validation_error("verify: --pair needs two distinct input modes");
        pairs.emplace_back(i - 1, j - 1);
    }
    return pairs;
}

int run_verify(const VerifyOptions& opt) {
    const TransferMatrix a = io::load_transfer_matrix(opt.matrix_a);
    const TransferMatrix b = io::load_transfer_matrix(opt.matrix_b);
    if (a.modes() != b.modes())
        throw validation_error("verify: mode counts differ (" + std::to_string(a.modes()) +
                               " vs " + std::to_string(b.modes()) + ")");
    const Eigen::Index n = a.modes();
    const auto pairs = parse_pairs(opt, n);

    std::ostringstream csv;
    csv << std::setprecision(17) << "in_i,in_j,out_k,out_l,v_a,v_b,abs_delta\n";

    std::cout << "  in    out        v(" << opt.matrix_a << ")  v(" << opt.matrix_b
              << ")  |delta|\n";
    double max_delta = 0.0;
    std::size_t compared = 0, skipped = 0;
    for (auto [i, j] : pairs) {
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index l = k + 1; l < n; ++l) {
                const TwoPhotonObservables va = visibility(a, i, j, k, l);
                const TwoPhotonObservables vb = visibility(b, i, j, k, l);
                std::cout << "  {" << (i + 1) << "," << (j + 1) << "}  {" << (k + 1) << ","
                          << (l + 1) << "}";
                if (!va.visibility || !vb.visibility) {
                    ++skipped;
                    std::cout << "   (no distinguishable coincidences, skipped)\n";
                    continue;
                }
                const double delta = std::abs(*va.visibility - *vb.visibility);
                max_delta = std::max(max_delta, delta);
                ++compared;
                std::cout << std::setprecision(6) << std::fixed << "   " << std::setw(9)
                          << *va.visibility << "  " << std::setw(9) << *vb.visibility << "  "
                          << std::scientific << delta << "\n";
                std::cout.unsetf(std::ios::floatfield);
                csv << (i + 1) << "," << (j + 1) << "," << (k + 1) << "," << (l + 1) << ","
                    << *va.visibility << "," << *vb.visibility << "," << delta << "\n";
            }
    }

    if (compared == 0)
        throw numerical_error("verify: no output pair yields a defined visibility");

    if (!opt.out.empty()) {
        std::ofstream out(opt.out, std::ios::binary | std::ios::trunc);
        if (!out)
            throw io_error("cannot open '" + opt.out + "' for writing");
        out << csv.str();
        json manifest = make_manifest("verify");
        manifest["matrix_a"] = opt.matrix_a;
        manifest["matrix_b"] = opt.matrix_b;
        manifest["output"] = opt.out;
        manifest["tolerance"] = opt.tolerance;
        io::save_json(fs::path(opt.out).string() + ".manifest.json", manifest);
    }

    std::cout << "compared " << compared << " visibilities (" << skipped
              << " skipped), max |delta| = " << std::setprecision(6) << std::scientific
              << max_delta << "\n";
    std::cout.unsetf(std::ios::floatfield);
    if (opt.tolerance >= 0.0 && max_delta > opt.tolerance) {
        std::cerr << "verify: max |delta| " << max_delta << " exceeds tolerance "
                  << opt.tolerance << "\n";
        return 5;
    }
    return 0;
}

struct EmbedOptions {
    std::string matrix;
    std::string record;
    std::string out;
    double gain_tol = 1e-3;
};

int run_embed(const EmbedOptions& opt) {
    const TransferMatrix net = io::load_transfer_matrix(opt.matrix);
    const LossEmbedding emb = embed_lossy(net, opt.gain_tol);
    const UnitaryFit fit = closest_unitary(emb.dilation);

    json manifest = make_manifest("embed");
    manifest["matrix"] = opt.matrix;
    manifest["output"] = opt.out;
    manifest["gain_tol"] = opt.gain_tol;

    io::save_embedding(opt.out, emb, &fit, manifest);

    std::cout << "eta:";
    for (Eigen::Index j = 0; j < emb.eta.size(); ++j)
        std::cout << " " << std::setprecision(6) << emb.eta(j);
    std::cout << "\n|BB+ - I| = " << std::scientific << emb.balanced_deviation
              << "   |VV+ - I| = " << emb.dilation_deviation
              << "   |V - U|_F = " << fit.distance << "\n";
    std::cout.unsetf(std::ios::floatfield);

    if (!opt.record.empty()) {
        const MeasurementRecord record = io::load_record(opt.record);
        if (record.n != static_cast<std::size_t>(net.modes()))
            throw validation_error("embed: record has " + std::to_string(record.n) +
                                   " modes, matrix has " + std::to_string(net.modes()));
        const Eigen::VectorXd eta_rec = transmissions_from_record(record, opt.gain_tol);
        const double diff = (eta_rec - emb.eta).cwiseAbs().maxCoeff();
        json j = io::load_json(opt.out);
        j["eta_from_record"] =
            std::vector<double>(eta_rec.data(), eta_rec.data() + eta_rec.size());
        j["eta_max_diff"] = diff;
        io::save_json(opt.out, j);
        std::cout << "eta from record agrees with matrix to " << std::scientific << diff
                  << "\n";
        std::cout.unsetf(std::ios::floatfield);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Characterize linear-optical networks from intensity measurements"};
    app.require_subcommand(1);
    app.set_version_flag("--version", NETCHAR_VERSION);

    GenerateOptions gen;
    CLI::App* cmd_gen = app.add_subcommand("generate", "Make a seeded test network");
    cmd_gen->add_option("-n,--n", gen.n, "Mode count (>= 2)")->required();
    cmd_gen->add_option("--loss", gen.loss,
                        "Loss model: lossless|uniform|per-input|path-dependent");
    cmd_gen->add_option("--seed", gen.seed, "Random seed");
    cmd_gen->add_option("--eta", gen.eta, "Amplitude transmission for --loss uniform");
    cmd_gen->add_option("--eta-list", gen.eta_list,
                        "Per-mode amplitude transmissions (comma separated)")
        ->delimiter(',');
    cmd_gen->add_option("-o,--out", gen.out, "Output matrix JSON")->required();

    SimulateOptions sim;
    CLI::App* cmd_sim = app.add_subcommand("simulate", "Run the virtual measurement bench");
    cmd_sim->add_option("-m,--matrix", sim.matrix, "Network matrix JSON")->required();
    cmd_sim->add_option("-o,--out", sim.out, "Output record JSON")->required();
    cmd_sim->add_option("--seed", sim.seed, "Noise seed");
    cmd_sim->add_option("--noise-intensity", sim.noise_intensity,
                        "Relative intensity noise (std)");
    cmd_sim->add_option("--noise-phase", sim.noise_phase, "Phase jitter per sample (rad, std)");
    cmd_sim->add_option("--gain", sim.gain, "Per-channel detector gains")->delimiter(',');
    cmd_sim->add_option("--offset", sim.offset, "Per-channel detector offsets")->delimiter(',');
    cmd_sim->add_option("--samples", sim.samples, "Sweep samples per trace");
    cmd_sim->add_option("--sweep-periods", sim.sweep_periods, "Sweep length in full turns");
    cmd_sim->add_option("--probe-intensity", sim.probe_intensity, "Probe intensity per arm");
    cmd_sim->add_option("--repeat", sim.repeat, "Write this many independent records");
    cmd_sim->add_flag("--inline", sim.inline_traces,
                      "Embed traces in the record instead of CSV files");

    CharacterizeOptions chr;
    CLI::App* cmd_chr =
        app.add_subcommand("characterize", "Reconstruct a transfer matrix from a record");
    cmd_chr->add_option("-r,--record", chr.record, "Measurement record JSON")->required();
    cmd_chr->add_option("-o,--out", chr.out, "Output result JSON")->required();
    cmd_chr->add_option("--repeat", chr.repeat,
                        "Consume a --repeat batch written by simulate; adds run-to-run spread");
    cmd_chr->add_option("--plot-dir", chr.plot_dir, "Write per-channel fit CSVs here");

    VerifyOptions ver;
    CLI::App* cmd_ver =
        app.add_subcommand("verify", "Compare two-photon visibilities of two matrices");
    cmd_ver->add_option("-a,--matrix-a", ver.matrix_a, "First matrix JSON")->required();
    cmd_ver->add_option("-b,--matrix-b", ver.matrix_b, "Second matrix JSON")->required();
    cmd_ver->add_option("--pair", ver.pairs, "Input pair 'i,j' (1-based, repeatable)");
    cmd_ver->add_option("--tolerance", ver.tolerance,
                        "Exit 5 when max |delta| exceeds this");
    cmd_ver->add_option("-o,--out", ver.out, "Write the comparison table CSV here");

    EmbedOptions emb;
    CLI::App* cmd_emb =
        app.add_subcommand("embed", "Dilate a lossy matrix to a 2N-mode candidate unitary");
    cmd_emb->add_option("-m,--matrix", emb.matrix, "Network matrix JSON")->required();
    cmd_emb->add_option("-r,--record", emb.record,
                        "Optional record JSON for a transmission cross-check");
    cmd_emb->add_option("-o,--out", emb.out, "Output embedding JSON")->required();
    cmd_emb->add_option("--gain-tol", emb.gain_tol, "Row-norm slack before rejecting gain");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_gen->parsed())
            return run_generate(gen);
        if (cmd_sim->parsed())
            return run_simulate(sim);
        if (cmd_chr->parsed())
            return run_characterize(chr);
        if (cmd_ver->parsed())
            return run_verify(ver);
        if (cmd_emb->parsed())
            return run_embed(emb);
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const numerical_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
