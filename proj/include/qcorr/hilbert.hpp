#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qcorr {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class ModeKind { Boson, TwoLevel };

/// One factor of the composite system: a truncated bosonic mode or a two-level mode.
struct ModeSpec {
  ModeKind kind = ModeKind::Boson;
  int cutoff = 0;  // max occupation; meaningful for bosons only
  std::string label;

  int dimension() const { return kind == ModeKind::Boson ? cutoff + 1 : 2; }
};

// Composite tensor-product space. The mode order is fixed at construction and
// defines the factor order of every embedding. Basis states are enumerated
// lexicographically by occupation (n_0, n_1, ...) with mode 0 most significant;
// for a two-level mode index 0 is ground and 1 is excited.
class HilbertSpace {
 public:
  HilbertSpace() = default;
  explicit HilbertSpace(std::vector<ModeSpec> modes);

  int dim() const { return dim_; }
  int num_modes() const { return static_cast<int>(modes_.size()); }
  const ModeSpec& mode(int i) const { return modes_.at(static_cast<size_t>(i)); }
  const std::vector<ModeSpec>& modes() const { return modes_; }

  /// Occupation of one mode in a given basis state.
  int occupation(int basis_index, int mode_index) const;
  /// Occupations of all modes in a given basis state.
  std::vector<int> occupations(int basis_index) const;

 private:
  std::vector<ModeSpec> modes_;
  std::vector<int> strides_;
  int dim_ = 1;
};

/// Truncated ladder operator a with entries A[n-1, n] = sqrt(n), n = 1..cutoff.
Matrix annihilation_matrix(int cutoff);
Matrix creation_matrix(int cutoff);

/// 2x2 sigma-minus, S[0,1] = 1 (maps excited to ground).
Matrix sigma_minus();
Matrix sigma_plus();

/// Number operator for one mode: a†a for bosons, σ⁺σ⁻ for two-level modes.
Matrix number_matrix(const ModeSpec& mode);
/// Lowering operator for one mode: a for bosons, σ⁻ for two-level modes.
Matrix lowering_matrix(const ModeSpec& mode);

/// I ⊗ ... ⊗ op ⊗ ... ⊗ I with op on factor mode_index.
Matrix embed(const Matrix& op, int mode_index, const HilbertSpace& space);

/// Σ_i embed(n_i, i); diagonal in the occupation basis.
Matrix total_number_operator(const HilbertSpace& space);

bool is_hermitian(const Matrix& m, double tol = 1e-12);

}  // namespace qcorr
