#include "dtcx/matrix.hpp"

#include <algorithm>

#include "dtcx/error.hpp"

namespace dtcx {

Matrix select_rows(const Matrix& src, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), src.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= src.rows()) {
      throw Error(ErrorCode::IndexOutOfRange, "row " + std::to_string(indices[i]));
    }
    const auto r = src.row(indices[i]);
    std::copy(r.begin(), r.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace dtcx
