#pragma once

#include "leach/coeff_table.hpp"
#include "leach/free_boundary.hpp"
#include "leach/macro_model.hpp"

#include <string>
#include <vector>

namespace leach {

/// Column names of the table CSV, in order.
std::vector<std::string> table_columns();

/// One CSV header line and one row per entry, 17 significant digits.
std::string coefficients_csv(const std::vector<EffectiveCoefficients>& entries);

/// Table CSV at `path` plus key=value metadata at `path + ".meta"`.
void write_table(const CoefficientTable& table, const std::string& path);

/// Inverse of write_table. Header, arity and number errors raise ParseError with the
/// file line; a table that fails its invariants raises InvalidInput.
CoefficientTable read_table(const std::string& path);

/// Legacy VTK structured points (ASCII), one point per cell center, arrays
/// c, r, phi, p_f, p_s, w_f, w_s. Byte output depends only on the inputs.
void write_snapshot(const MacroState& state, const ScalarField& r, const std::string& path);

struct Snapshot {
    MacroState state;
    ScalarField r;
};

Snapshot read_snapshot(const std::string& path);

/// (4 pi / 3) * mean over cells of (r0^3 - r^3). Throws IntegrityError where r > r0.
double dissolved_volume(const ScalarField& r, const ScalarField& r0);

void write_time_series(const std::vector<TimeSeriesRow>& rows, const std::string& path);
void write_picard_reports(const std::vector<PicardReport>& reports, const std::string& path);
/// File names are written relative to the directory holding the index.
void write_snapshot_index(const std::vector<SnapshotRecord>& records, const std::string& path);

}  // namespace leach
