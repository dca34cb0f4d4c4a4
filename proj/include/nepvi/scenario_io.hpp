#pragma once

#include "nepvi/mimo.hpp"
#include "nepvi/siso.hpp"

#include <string>

namespace nepvi {

// SISO: {"kind":"siso", I, N, gains[i][j][k], sigma2[i][k], P[i], pmax[i][k], W[i][m][k], alpha[i][m]}.
std::string siso_to_json(const SisoScenario& s);
SisoScenario siso_from_json(const std::string& text);

// MIMO: complex matrices as {"rows", "cols", "data": [re, im, ...]} in row-major
// order; per-player constraint blocks tagged by "kind" (budget, null, shaping).
// Peak shaping and abstract extra sets are rejected.
std::string mimo_to_json(const MimoScenario& s);
MimoScenario mimo_from_json(const std::string& text);

// "siso", "mimo", or "condensed" (a bare {"upsilon": [[...]]} or {"alpha", "beta"} file).
std::string scenario_kind(const std::string& text);

// Condensed matrices given directly: {"alpha": [...], "beta": [[...]]} or {"upsilon": [[...]]}.
CondensedMatrices condensed_from_json(const std::string& text);

// Row-major CSV, one matrix row per line.
std::string matrix_to_csv(const Mat& m);
Mat matrix_from_csv(const std::string& text);
// Complex matrices as rows of re,im pairs.
std::string complex_matrix_to_csv(const CMat& m);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace nepvi
