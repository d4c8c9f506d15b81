#pragma once

#include <string>

#include "lprnn/cells.hpp"
#include "lprnn/esn.hpp"

namespace lprnn {

/// Trained recurrent model plus its readout head.
struct LpRnnCheckpoint {
    LpRnnParams cell;
    Dense readout;
};

struct LpLstmCheckpoint {
    LpLstmParams cell;
    Dense readout;
};

void save_checkpoint(const std::string& path, const LpRnnParams& cell, const Dense& readout);
void save_checkpoint(const std::string& path, const LpLstmParams& cell, const Dense& readout);
void save_checkpoint(const std::string& path, const EsnParams& esn);

/// Reads just the "kind" field ("lprnn", "lplstm" or "esn"). Throws IoError
/// when the file is missing or is not a checkpoint.
std::string checkpoint_kind(const std::string& path);

LpRnnCheckpoint load_lprnn_checkpoint(const std::string& path);
LpLstmCheckpoint load_lplstm_checkpoint(const std::string& path);
EsnParams load_esn_checkpoint(const std::string& path);

}  // namespace lprnn
