#pragma once

#include "netchar/characterization.hpp"
#include "netchar/loss_embedding.hpp"
#include "netchar/network.hpp"
#include "netchar/virtual_lab.hpp"

#include <json.hpp>

#include <filesystem>

// File formats.
//
// Matrix JSON: {"n": N, "re": [[row-major N x N]], "im": [[...]]} plus
// optional keys "noise_floor_rel" (widens physicality slack on load) and
// "manifest" (opaque provenance object, preserved but never interpreted).
//
// Measurement record JSON: probe intensity, sweep and noise settings, the N
// single-input intensity rows, and the N-1 fringe traces. A trace holds its
// samples inline ("phi" + "intensity") or points at a CSV file ("csv",
// resolved relative to the record's directory) with header phi,ch1,...,chN.
//
// Mode indices in files are 1-based to match the command line; in-memory
// structures are 0-based throughout.
//
// All writers go through a temp-file-and-rename so a crash cannot leave a
// half-written artifact behind.

namespace netchar::io {

nlohmann::json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const nlohmann::json& j);

nlohmann::json matrix_to_json(const linalg::Matrix& m);
linalg::Matrix matrix_from_json(const nlohmann::json& j);

void save_transfer_matrix(const std::filesystem::path& path, const TransferMatrix& net,
                          const nlohmann::json& extra = nlohmann::json::object());
TransferMatrix load_transfer_matrix(const std::filesystem::path& path);

// With a nonempty csv_stem, each trace is written to
// "<csv_stem>_trace<j>.csv" (j the 1-based paired input) in the record's
// directory and referenced from the record instead of being inlined.
void save_record(const std::filesystem::path& path, const MeasurementRecord& record,
                 const nlohmann::json& manifest = nlohmann::json::object(),
                 const std::string& csv_stem = {});
MeasurementRecord load_record(const std::filesystem::path& path);

void save_characterization(const std::filesystem::path& path,
                           const CharacterizationResult& result,
                           const nlohmann::json& manifest = nlohmann::json::object());

void save_embedding(const std::filesystem::path& path, const LossEmbedding& emb,
                    const UnitaryFit* fit = nullptr,
                    const nlohmann::json& manifest = nlohmann::json::object());

void write_fringe_csv(const std::filesystem::path& path, const FringeTrace& trace);
void read_fringe_csv(const std::filesystem::path& path, FringeTrace& trace);

} // namespace netchar::io
