#pragma once

#include <string>
#include <vector>

#include "fraclap/study.hpp"

namespace fraclap {

// CSV columns: alpha,kappa,N,scheme,solver,error_inf,order,iterations,wall_time_s
// Doubles use 17 significant digits, so parsing the output recovers the rows
// exactly. Markdown mirrors the error/order pair layout of the study tables.
std::string emit_table(const std::vector<StudyRow>& rows, OutputFormat format);

// Inverse of the CSV emitter (header required).
std::vector<StudyRow> parse_study_csv(const std::string& text);

}  // namespace fraclap
