#include "qcorr/hilbert.hpp"

#include <cmath>

#include "qcorr/errors.hpp"

namespace qcorr {

HilbertSpace::HilbertSpace(std::vector<ModeSpec> modes) : modes_(std::move(modes)) {
  if (modes_.empty()) throw ValidationError("HilbertSpace needs at least one mode");
  for (const auto& m : modes_) {
    if (m.kind == ModeKind::Boson && m.cutoff < 0)
      throw ValidationError("bosonic cutoff must be >= 0 (mode '" + m.label + "')");
  }
  strides_.assign(modes_.size(), 1);
  for (int i = static_cast<int>(modes_.size()) - 2; i >= 0; --i)
    strides_[static_cast<size_t>(i)] =
        strides_[static_cast<size_t>(i) + 1] * modes_[static_cast<size_t>(i) + 1].dimension();
  dim_ = strides_[0] * modes_[0].dimension();
}

int HilbertSpace::occupation(int basis_index, int mode_index) const {
  const auto m = static_cast<size_t>(mode_index);
  return (basis_index / strides_.at(m)) % modes_[m].dimension();
}

std::vector<int> HilbertSpace::occupations(int basis_index) const {
  std::vector<int> occ(modes_.size());
  for (int i = 0; i < num_modes(); ++i) occ[static_cast<size_t>(i)] = occupation(basis_index, i);
  return occ;
}

Matrix annihilation_matrix(int cutoff) {
  if (cutoff < 0) throw ValidationError("cutoff must be >= 0");
  Matrix a = Matrix::Zero(cutoff + 1, cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Matrix creation_matrix(int cutoff) { return annihilation_matrix(cutoff).adjoint(); }

Matrix sigma_minus() {
  Matrix s = Matrix::Zero(2, 2);
  s(0, 1) = 1.0;
  return s;
}

Matrix sigma_plus() { return sigma_minus().adjoint(); }

Matrix number_matrix(const ModeSpec& mode) {
  if (mode.kind == ModeKind::Boson) {
    Matrix n = Matrix::Zero(mode.dimension(), mode.dimension());
    for (int k = 0; k <= mode.cutoff; ++k) n(k, k) = static_cast<double>(k);
    return n;
  }
  Matrix n = Matrix::Zero(2, 2);
  n(1, 1) = 1.0;
  return n;
}

Matrix lowering_matrix(const ModeSpec& mode) {
  return mode.kind == ModeKind::Boson ? annihilation_matrix(mode.cutoff) : sigma_minus();
}

Matrix embed(const Matrix& op, int mode_index, const HilbertSpace& space) {
  if (mode_index < 0 || mode_index >= space.num_modes())
    throw ValidationError("embed: mode index out of range");
  const int d = space.mode(mode_index).dimension();
  if (op.rows() != d || op.cols() != d)
    throw ValidationError("embed: operator dimension does not match mode dimension");

  int left = 1, right = 1;
  for (int i = 0; i < mode_index; ++i) left *= space.mode(i).dimension();
  for (int i = mode_index + 1; i < space.num_modes(); ++i) right *= space.mode(i).dimension();

  Matrix out = Matrix::Zero(space.dim(), space.dim());
  for (int l = 0; l < left; ++l)
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) {
        const Complex v = op(r, c);
        if (v == Complex{0.0, 0.0}) continue;
        const int row0 = (l * d + r) * right;
        const int col0 = (l * d + c) * right;
        for (int k = 0; k < right; ++k) out(row0 + k, col0 + k) = v;
      }
  return out;
}

Matrix total_number_operator(const HilbertSpace& space) {
  Matrix n = Matrix::Zero(space.dim(), space.dim());
  for (int b = 0; b < space.dim(); ++b) {
    double total = 0.0;
    for (int m = 0; m < space.num_modes(); ++m) total += space.occupation(b, m);
    n(b, b) = total;
  }
  return n;
}

bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

}  // namespace qcorr
