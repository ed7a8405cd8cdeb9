#pragma once

#include <string>
#include <vector>

#include "rectex/matrix.hpp"
#include "rectex/training.hpp"

namespace rectex {

// Matrix CSV: mandatory header naming one column per unit, then one row per
// coordinate with the bias row last. Values are written with %.17g so a
// write/read cycle reproduces every double bit-exactly.
void save_matrix_csv(const std::string& path, const Matrix& m,
                     const std::string& column_prefix = "unit");
Matrix load_matrix_csv(const std::string& path);

// Dataset CSV: header "d,x_1,...,x_d,label"; one row per point.
void save_dataset_csv(const std::string& path, const Dataset& data);
Dataset load_dataset_csv(const std::string& path);

// Experiment report CSV with a fixed column set, one row per trained model.
void save_report_csv(const std::string& path, const std::vector<ExperimentRow>& rows);
std::vector<ExperimentRow> load_report_csv(const std::string& path);

std::string format_double(double v);  // %.17g

}  // namespace rectex
