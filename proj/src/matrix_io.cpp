#include "ligme/matrix_io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ligme {

Matrix read_matrix(std::istream& in) {
  long long rows = -1, cols = -1;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0)
    throw std::runtime_error("read_matrix: bad header, expected \"rows cols\"");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (!(in >> m(i, j)))
        throw std::runtime_error("read_matrix: expected " + std::to_string(rows * cols) +
                                 " entries, ran out at row " + std::to_string(i + 1));
    }
  }
  std::string trailing;
  if (in >> trailing) throw std::runtime_error("read_matrix: unexpected trailing data");
  return m;
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_matrix: cannot open " + path.string());
  return read_matrix(in);
}

Vector read_vector(const std::filesystem::path& path) {
  Matrix m = read_matrix(path);
  if (m.cols() != 1) throw std::runtime_error("read_vector: " + path.string() + " is not a single column");
  return m.col(0);
}

void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << m(i, j);
    }
    out << '\n';
  }
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix: cannot open " + path.string());
  write_matrix(out, m);
}

}  // namespace ligme
