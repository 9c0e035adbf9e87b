#pragma once

#include <iosfwd>
#include <string>

#include "gemfit/linalg.hpp"
#include "gemfit/solver.hpp"
#include "gemfit/synthetic.hpp"

namespace gemfit {

// Matrix text format:
//   line 1: "<rows> <cols>"
//   then rows * cols decimal values, row-major, whitespace separated,
//   written one row per line with 17 significant digits.
// Lines starting with '#' are comments. Errors carry 1-based line numbers.
void write_matrix(std::ostream& out, const Eigen::Ref<const MatX>& m);
MatX read_matrix(std::istream& in);

void write_matrix_file(const std::string& path, const Eigen::Ref<const MatX>& m);
MatX read_matrix_file(const std::string& path);

// Throws Error(kDimension) unless the file holds a rows x cols matrix.
MatX read_matrix_file(const std::string& path, Eigen::Index rows, Eigen::Index cols);

// Correspondence text format: one pair per line, 12 values
//   dL(3) mL(3) dR(3) mR(3)
// Each line must satisfy |d^T m| <= 1e-6; directions are normalized on read.
// An optional "# truth r00 r01 ... r22 t0 t1 t2" line carries ground truth.
void write_correspondences(std::ostream& out, const CorrespondenceSet& corr);
CorrespondenceSet read_correspondences(std::istream& in);

void write_correspondences_file(const std::string& path, const CorrespondenceSet& corr);
CorrespondenceSet read_correspondences_file(const std::string& path);

}  // namespace gemfit
