#pragma once

#include <filesystem>

#include "tcr/dataset.hpp"

namespace tcr {

// Writes blocks.csv, sections.csv, teachers.csv and students.csv into `dir`
// (created if needed). Latent columns (latent_U, latent_V) are written only
// when `with_oracle` is set and the dataset carries them.
void export_dataset(const Dataset& ds, const std::filesystem::path& dir, bool with_oracle = false);

// Reads the four files back. Columns named aux_* become auxiliary
// attributes (prefix stripped); latent_* columns populate the oracle.
// Throws DataError naming the file, line and column on schema problems.
Dataset import_dataset(const std::filesystem::path& dir);

}  // namespace tcr
