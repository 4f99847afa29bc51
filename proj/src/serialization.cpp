#include "netchar/serialization.hpp"

#include "netchar/errors.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>

namespace netchar::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text_atomic(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw io_error("cannot open '" + tmp.string() + "' for writing");
        out << text;
        if (!out)
            throw io_error("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec)
        throw io_error("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

const json& require(const json& j, const char* key, const char* what) {
    auto it = j.find(key);
    if (it == j.end())
        throw validation_error(std::string(what) + ": missing key '" + key + "'");
    return *it;
}

double require_number(const json& j, const char* key, const char* what) {
    const json& v = require(j, key, what);
    if (!v.is_number())
        throw validation_error(std::string(what) + ": key '" + key + "' is not a number");
    return v.get<double>();
}

std::size_t require_size(const json& j, const char* key, const char* what) {
    const json& v = require(j, key, what);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw validation_error(std::string(what) + ": key '" + key +
                               "' is not a nonnegative integer");
    return v.get<std::size_t>();
}

std::vector<double> number_vector(const json& v, const char* what) {
    if (!v.is_array())
        throw validation_error(std::string(what) + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& e : v) {
        if (!e.is_number())
            throw validation_error(std::string(what) + ": array element is not a number");
        out.push_back(e.get<double>());
    }
    return out;
}

Eigen::MatrixXd real_matrix_from_json(const json& v, std::size_t rows, std::size_t cols,
                                      const char* what) {
    if (!v.is_array() || v.size() != rows)
        throw validation_error(std::string(what) + ": expected " + std::to_string(rows) +
                               " rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::vector<double> row = number_vector(v[r], what);
        if (row.size() != cols)
            throw validation_error(std::string(what) + ": row " + std::to_string(r + 1) +
                                   " has " + std::to_string(row.size()) + " entries, expected " +
                                   std::to_string(cols));
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
    return m;
}

json real_matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json trace_to_json(const FringeTrace& trace) {
    json t;
    t["input"] = trace.paired_input + 1;
    t["probe_intensity"] = trace.probe_intensity;
    json phi = json::array();
    for (Eigen::Index i = 0; i < trace.phi.size(); ++i)
        phi.push_back(trace.phi(i));
    t["phi"] = std::move(phi);
    t["intensity"] = real_matrix_to_json(trace.intensity);
    return t;
}

FringeTrace trace_from_json(const json& t, std::size_t n, const fs::path& base_dir) {
    FringeTrace trace;
    const std::size_t input = require_size(t, "input", "trace");
    if (input < 1)
        throw validation_error("trace: 'input' is 1-based and must be at least 1");
    trace.paired_input = input - 1;
    trace.probe_intensity = require_number(t, "probe_intensity", "trace");

    if (auto csv = t.find("csv"); csv != t.end()) {
        if (!csv->is_string())
            throw validation_error("trace: 'csv' must be a file path string");
        read_fringe_csv(base_dir / fs::path(csv->get<std::string>()), trace);
        if (static_cast<std::size_t>(trace.intensity.rows()) != n)
            throw validation_error("trace: CSV file has " +
                                   std::to_string(trace.intensity.rows()) +
                                   " channels, expected " + std::to_string(n));
        return trace;
    }

    const std::vector<double> phi = number_vector(require(t, "phi", "trace"), "trace phi");
    trace.phi = Eigen::Map<const Eigen::VectorXd>(phi.data(),
                                                  static_cast<Eigen::Index>(phi.size()));
    trace.intensity =
        real_matrix_from_json(require(t, "intensity", "trace"), n, phi.size(), "trace intensity");
    return trace;
}

} // namespace

json load_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open '" + path.string() + "' for reading");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw io_error("cannot parse '" + path.string() + "': " + e.what());
    }
}

void save_json(const fs::path& path, const json& j) {
    write_text_atomic(path, j.dump(2) + "\n");
}

json matrix_to_json(const linalg::Matrix& m) {
    json j;
    j["n"] = m.rows();
    j["re"] = real_matrix_to_json(m.real());
    j["im"] = real_matrix_to_json(m.imag());
    return j;
}

linalg::Matrix matrix_from_json(const json& j) {
    const std::size_t n = require_size(j, "n", "matrix");
    if (n == 0)
        throw validation_error("matrix: 'n' must be positive");
    const Eigen::MatrixXd re = real_matrix_from_json(require(j, "re", "matrix"), n, n, "matrix re");
    const Eigen::MatrixXd im = real_matrix_from_json(require(j, "im", "matrix"), n, n, "matrix im");
    return re.cast<linalg::Complex>() + linalg::Complex(0.0, 1.0) * im.cast<linalg::Complex>();
}

void save_transfer_matrix(const fs::path& path, const TransferMatrix& net, const json& extra) {
    json j = matrix_to_json(net.matrix());
    for (auto it = extra.begin(); it != extra.end(); ++it)
        j[it.key()] = it.value();
    save_json(path, j);
}

TransferMatrix load_transfer_matrix(const fs::path& path) {
    json j = load_json(path);
    double noise_floor = 0.0;
    if (auto nf = j.find("noise_floor_rel"); nf != j.end() && nf->is_number())
        noise_floor = nf->get<double>();
    // A characterization result wraps its matrix one level down; accept it
    // directly so downstream commands can consume either file kind.
    const json* body = &j;
    if (!j.contains("re") && j.contains("matrix"))
        body = &j.at("matrix");

    PhysicalityTolerances tol;
    tol.modulus_slack = std::max(tol.modulus_slack, 8.0 * noise_floor);
    tol.gain_slack = std::max(tol.gain_slack, 8.0 * noise_floor);
    try {
        return TransferMatrix(matrix_from_json(*body), tol);
    } catch (const validation_error& e) {
        throw validation_error("'" + path.string() + "': " + e.what());
    }
}

void save_record(const fs::path& path, const MeasurementRecord& record, const json& manifest,
                 const std::string& csv_stem) {
    json j;
    j["n"] = record.n;
    j["probe_intensity"] = record.probe_intensity;
    j["sweep"] = {{"samples", record.sweep.samples}, {"periods", record.sweep.periods}};

    json noise;
    noise["intensity_sigma"] = record.noise.intensity_sigma;
    noise["phase_jitter_sigma"] = record.noise.phase_jitter_sigma;
    noise["seed"] = record.noise.seed;
    if (!record.noise.gain.empty())
        noise["gain"] = record.noise.gain;
    if (!record.noise.offset.empty())
        noise["offset"] = record.noise.offset;
    j["noise"] = std::move(noise);

    json singles = json::array();
    for (const SingleInputRecord& s : record.singles) {
        json entry;
        entry["input"] = s.input_mode + 1;
        entry["probe_intensity"] = s.probe_intensity;
        entry["intensities"] = s.intensities;
        singles.push_back(std::move(entry));
    }
    j["singles"] = std::move(singles);

    json traces = json::array();
    const fs::path base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    for (const FringeTrace& t : record.traces) {
        if (csv_stem.empty()) {
            traces.push_back(trace_to_json(t));
        } else {
            const std::string name =
                csv_stem + "_trace" + std::to_string(t.paired_input + 1) + ".csv";
            write_fringe_csv(base_dir / name, t);
            traces.push_back({{"input", t.paired_input + 1},
                              {"probe_intensity", t.probe_intensity},
                              {"csv", name}});
        }
    }
    j["traces"] = std::move(traces);

    if (!manifest.empty())
        j["manifest"] = manifest;
    save_json(path, j);
}

MeasurementRecord load_record(const fs::path& path) {
    const json j = load_json(path);
    const fs::path base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");

    MeasurementRecord record;
    record.n = require_size(j, "n", "record");
    record.probe_intensity = require_number(j, "probe_intensity", "record");

    const json& sweep = require(j, "sweep", "record");
    record.sweep.samples = require_size(sweep, "samples", "sweep");
    record.sweep.periods = require_number(sweep, "periods", "sweep");

    const json& noise = require(j, "noise", "record");
    record.noise.intensity_sigma = require_number(noise, "intensity_sigma", "noise");
    record.noise.phase_jitter_sigma = require_number(noise, "phase_jitter_sigma", "noise");
    const json& seed = require(noise, "seed", "noise");
    if (!seed.is_number_unsigned() && !seed.is_number_integer())
        throw validation_error("noise: 'seed' must be an integer");
    record.noise.seed = seed.get<std::uint64_t>();
    if (auto g = noise.find("gain"); g != noise.end())
        record.noise.gain = number_vector(*g, "noise gain");
    if (auto o = noise.find("offset"); o != noise.end())
        record.noise.offset = number_vector(*o, "noise offset");

    const json& singles = require(j, "singles", "record");
    if (!singles.is_array())
        throw validation_error("record: 'singles' must be an array");
    for (const json& s : singles) {
        SingleInputRecord entry;
        const std::size_t input = require_size(s, "input", "single-input record");
        if (input < 1)
            throw validation_error("single-input record: 'input' is 1-based, must be >= 1");
        entry.input_mode = input - 1;
        entry.probe_intensity = require_number(s, "probe_intensity", "single-input record");
        entry.intensities = number_vector(require(s, "intensities", "single-input record"),
                                          "single-input intensities");
        record.singles.push_back(std::move(entry));
    }

    const json& traces = require(j, "traces", "record");
    if (!traces.is_array())
        throw validation_error("record: 'traces' must be an array");
    for (const json& t : traces)
        record.traces.push_back(trace_from_json(t, record.n, base_dir));

    try {
        record.validate();
    } catch (const validation_error& e) {
        throw validation_error("'" + path.string() + "': " + e.what());
    }
    return record;
}

void save_characterization(const fs::path& path, const CharacterizationResult& result,
                           const json& manifest) {
    json j;
    j["matrix"] = matrix_to_json(result.matrix.matrix());
    j["modulus_sigma"] = real_matrix_to_json(result.modulus_sigma);
    j["phase_sigma"] = real_matrix_to_json(result.phase_sigma);

    json indet = json::array();
    for (const auto& row : result.indeterminate) {
        json r = json::array();
        for (bool b : row)
            r.push_back(b);
        indet.push_back(std::move(r));
    }
    j["indeterminate"] = std::move(indet);

    j["noise_floor_rel"] = result.noise_floor_rel;
    j["clamped_intensities"] = result.clamped_intensities;

    json diags = json::array();
    for (const TraceDiagnostics& d : result.diagnostics) {
        json channels = json::array();
        for (const ChannelDiagnostics& c : d.channels)
            channels.push_back({{"mean", c.mean},
                                {"amplitude", c.amplitude},
                                {"phase", c.phase},
                                {"rms_residual", c.rms_residual},
                                {"phase_sigma", c.phase_sigma},
                                {"low_amplitude", c.low_amplitude}});
        diags.push_back({{"input", d.paired_input + 1}, {"channels", std::move(channels)}});
    }
    j["trace_diagnostics"] = std::move(diags);

    if (!manifest.empty())
        j["manifest"] = manifest;
    save_json(path, j);
}

void save_embedding(const fs::path& path, const LossEmbedding& emb, const UnitaryFit* fit,
                    const json& manifest) {
    json j;
    j["eta"] = std::vector<double>(emb.eta.data(), emb.eta.data() + emb.eta.size());
    j["balanced"] = matrix_to_json(emb.balanced);
    j["dilation"] = matrix_to_json(emb.dilation);
    j["balanced_deviation"] = emb.balanced_deviation;
    j["dilation_deviation"] = emb.dilation_deviation;
    j["clamped"] = emb.clamped;
    if (fit) {
        j["closest_unitary"] = matrix_to_json(fit->unitary);
        j["unitary_distance"] = fit->distance;
    }
    if (!manifest.empty())
        j["manifest"] = manifest;
    save_json(path, j);
}

void write_fringe_csv(const fs::path& path, const FringeTrace& trace) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "phi";
    for (Eigen::Index k = 0; k < trace.intensity.rows(); ++k)
        out << ",ch" << (k + 1);
    out << "\n";
    for (Eigen::Index i = 0; i < trace.phi.size(); ++i) {
        out << trace.phi(i);
        for (Eigen::Index k = 0; k < trace.intensity.rows(); ++k)
            out << "," << trace.intensity(k, i);
        out << "\n";
    }
    write_text_atomic(path, out.str());
}

void read_fringe_csv(const fs::path& path, FringeTrace& trace) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open '" + path.string() + "' for reading");

    std::string line;
    if (!std::getline(in, line))
        throw io_error("'" + path.string() + "': empty file");

    // Header: phi,ch1,...,chN fixes the channel count.
    std::size_t channels = 0;
    {
        std::istringstream header(line);
        std::string field;
        if (!std::getline(header, field, ',') || field != "phi")
            throw validation_error("'" + path.string() + "': first column must be 'phi'");
        while (std::getline(header, field, ',')) {
            ++channels;
            if (field != "ch" + std::to_string(channels))
                throw validation_error("'" + path.string() + "': column " +
                                       std::to_string(channels + 1) + " must be 'ch" +
                                       std::to_string(channels) + "', got '" + field + "'");
        }
    }
    if (channels == 0)
        throw validation_error("'" + path.string() + "': no channel columns");

    std::vector<double> phi;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        std::istringstream fields(line);
        std::string field;
        std::vector<double> values;
        while (std::getline(fields, field, ',')) {
            try {
                std::size_t pos = 0;
                values.push_back(std::stod(field, &pos));
                if (pos != field.size())
                    throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw io_error("'" + path.string() + "' line " + std::to_string(line_no) +
                               ": cannot parse '" + field + "' as a number");
            }
        }
        if (values.size() != channels + 1)
            throw validation_error("'" + path.string() + "' line " + std::to_string(line_no) +
                                   ": expected " + std::to_string(channels + 1) +
                                   " fields, got " + std::to_string(values.size()));
        phi.push_back(values[0]);
        values.erase(values.begin());
        rows.push_back(std::move(values));
    }

    const auto samples = static_cast<Eigen::Index>(phi.size());
    trace.phi = Eigen::Map<const Eigen::VectorXd>(phi.data(), samples);
    trace.intensity.resize(static_cast<Eigen::Index>(channels), samples);
    for (Eigen::Index i = 0; i < samples; ++i)
        for (std::size_t k = 0; k < channels; ++k)
            trace.intensity(static_cast<Eigen::Index>(k), i) = rows[static_cast<std::size_t>(i)][k];
}

} // namespace netchar::io
