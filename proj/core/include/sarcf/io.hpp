#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sarcf/dgp.hpp"

namespace sarcf {

// Shortest round-trip decimal form (%.17g), '.' decimal separator.
std::string format_float(double v);

// Dense matrix as headerless CSV, one row per line, LF endings.
std::string to_csv(const Eigen::MatrixXd& m);

// Sparse triplet form: header "i,j,w", zero-based indices, nonzeros only,
// row-major order.
std::string to_triplet_csv(const Eigen::MatrixXd& m);
// Inverse of to_triplet_csv; n is the (square) dimension. Throws
// InputError on malformed rows or out-of-range indices.
Eigen::MatrixXd from_triplet_csv(const std::string& text, Eigen::Index n);

// One row per unit: unit,coord1..coordD,econ1..econQ,eps,d,y.
std::string population_csv(const Population& pop);

// Write via temp file in the same directory plus atomic rename, so a
// crash never leaves a partial file at `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

} // namespace sarcf
