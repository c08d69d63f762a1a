#pragma once

// Quantum core for a single photon carrying two qubit-like degrees of
// freedom: polarization {H,V} (diagonal {R,A}) and spatial mode {b1,b2}
// (superposed {s,a}), plus an optional adversary probe subsystem.
//
// Amplitude ordering is fixed everywhere: photon index = 2*pol + spat, i.e.
// [H b1, H b2, V b1, V b2]. A joint state with a probe of dimension P is
// photon-major: amplitude(photon j, probe k) sits at j*P + k.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqkd/errors.hpp"
#include "sqkd/random.hpp"

namespace sqkd {

using cx = std::complex<double>;

inline constexpr std::size_t kPhotonDim = 4;
inline constexpr double kNormTol = 1e-10;     // state / unitary / density invariants
inline constexpr double kEigClamp = 1e-12;    // eigenvalues below this count as zero in entropies
inline constexpr double kCollapseFloor = 1e-12;  // minimum projection norm that still collapses

// ---------------------------------------------------------------------------
// Bases and labels

enum class PolBasis : std::uint8_t { Zp, Xp };    // {H,V} vs {R,A}
enum class SpatBasis : std::uint8_t { Zs, Xs };   // {b1,b2} vs {s,a}

struct ProductBasis {
  PolBasis pol{PolBasis::Zp};
  SpatBasis spat{SpatBasis::Zs};
  friend bool operator==(const ProductBasis&, const ProductBasis&) = default;
};

inline constexpr ProductBasis kBasisZZ{PolBasis::Zp, SpatBasis::Zs};
inline constexpr ProductBasis kBasisZX{PolBasis::Zp, SpatBasis::Xs};
inline constexpr ProductBasis kBasisXZ{PolBasis::Xp, SpatBasis::Zs};
inline constexpr ProductBasis kBasisXX{PolBasis::Xp, SpatBasis::Xs};
inline constexpr std::array<ProductBasis, 4> kAllBases{kBasisZZ, kBasisZX, kBasisXZ, kBasisXX};

// Labels 0..3 index the four product states of a basis, polarization-major.
inline constexpr int pol_index(int label) { return (label >> 1) & 1; }
inline constexpr int spat_index(int label) { return label & 1; }
inline constexpr int make_label(int pol, int spat) { return 2 * pol + spat; }

inline int basis_index(ProductBasis b) {
  return 2 * (b.pol == PolBasis::Xp ? 1 : 0) + (b.spat == SpatBasis::Xs ? 1 : 0);
}

inline std::string pol_state_name(PolBasis b, int bit) {
  if (b == PolBasis::Zp) return bit ? "V" : "H";
  return bit ? "A" : "R";
}

inline std::string spat_state_name(SpatBasis b, int bit) {
  if (b == SpatBasis::Zs) return bit ? "b2" : "b1";
  return bit ? "a" : "s";
}

// e.g. (ZZ, 0) -> "Hb1", (XX, 3) -> "Aa"
inline std::string state_name(ProductBasis b, int label) {
  return pol_state_name(b.pol, pol_index(label)) + spat_state_name(b.spat, spat_index(label));
}

inline std::string basis_name(ProductBasis b) {
  std::string s = (b.pol == PolBasis::Zp) ? "Zp" : "Xp";
  s += (b.spat == SpatBasis::Zs) ? "Zs" : "Xs";
  return s;
}

inline ProductBasis basis_from_name(const std::string& s) {
  for (ProductBasis b : kAllBases)
    if (basis_name(b) == s) return b;
  throw DimensionMismatch("unknown basis name: " + s);
}

// ---------------------------------------------------------------------------
// State vectors

class StateVector {
 public:
  explicit StateVector(std::vector<cx> amps) : amps_(std::move(amps)) {
    if (amps_.empty()) throw DimensionMismatch("state vector must have positive dimension");
    double norm2 = 0.0;
    for (const cx& a : amps_) {
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
        throw StateError("state vector has non-finite amplitude");
      norm2 += std::norm(a);
    }
    if (std::abs(norm2 - 1.0) > kNormTol)
      throw StateError("state vector is not normalized: |psi|^2 = " + std::to_string(norm2));
  }

  static StateVector basis_state(std::size_t dim, std::size_t index) {
    if (index >= dim) throw DimensionMismatch("basis_state: index out of range");
    std::vector<cx> a(dim, cx{0.0, 0.0});
    a[index] = cx{1.0, 0.0};
    return StateVector(std::move(a));
  }

  std::size_t dim() const { return amps_.size(); }
  cx operator[](std::size_t i) const { return amps_[i]; }
  const std::vector<cx>& amps() const { return amps_; }

 private:
  std::vector<cx> amps_;
};

inline cx inner(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("inner: dimension mismatch");
  cx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline StateVector tensor(const StateVector& a, const StateVector& b) {
  std::vector<cx> out(a.dim() * b.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j) out[i * b.dim() + j] = a[i] * b[j];
  return StateVector(std::move(out));
}

// The four product states of a measurement basis, in label order.
inline std::array<StateVector, 4> basis_vectors(ProductBasis basis) {
  const double r = 1.0 / std::sqrt(2.0);
  // rows: which basis vector (bit 0 / bit 1); cols: amplitude on Z eigenstates
  const std::array<std::array<cx, 2>, 2> pol =
      (basis.pol == PolBasis::Zp)
          ? std::array<std::array<cx, 2>, 2>{{{cx{1, 0}, cx{0, 0}}, {cx{0, 0}, cx{1, 0}}}}
          : std::array<std::array<cx, 2>, 2>{{{cx{r, 0}, cx{r, 0}}, {cx{r, 0}, cx{-r, 0}}}};
  const std::array<std::array<cx, 2>, 2> spat =
      (basis.spat == SpatBasis::Zs)
          ? std::array<std::array<cx, 2>, 2>{{{cx{1, 0}, cx{0, 0}}, {cx{0, 0}, cx{1, 0}}}}
          : std::array<std::array<cx, 2>, 2>{{{cx{r, 0}, cx{r, 0}}, {cx{r, 0}, cx{-r, 0}}}};

  std::array<std::vector<cx>, 4> amps;
  for (int label = 0; label < 4; ++label) {
    amps[label].resize(kPhotonDim);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        amps[label][2 * i + j] = pol[pol_index(label)][i] * spat[spat_index(label)][j];
  }
  return {StateVector(std::move(amps[0])), StateVector(std::move(amps[1])),
          StateVector(std::move(amps[2])), StateVector(std::move(amps[3]))};
}

// ---------------------------------------------------------------------------
// Unitaries

class UnitaryMatrix {
 public:
  // Row-major entries; validates U†U = I entrywise within tol.
  UnitaryMatrix(std::size_t dim, std::vector<cx> entries, double tol = kNormTol)
      : dim_(dim), m_(std::move(entries)) {
    if (dim_ == 0 || m_.size() != dim_ * dim_)
      throw DimensionMismatch("unitary: entry count does not match dimension");
    for (const cx& a : m_)
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
        throw StateError("unitary: non-finite entry");
    double worst = 0.0;
    std::size_t wi = 0, wj = 0;
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = 0; j < dim_; ++j) {
        cx g{0.0, 0.0};
        for (std::size_t k = 0; k < dim_; ++k) g += std::conj(m_[k * dim_ + i]) * m_[k * dim_ + j];
        const double dev = std::abs(g - (i == j ? cx{1, 0} : cx{0, 0}));
        if (dev > worst) { worst = dev; wi = i; wj = j; }
      }
    }
    if (worst > tol)
      throw StateError("matrix is not unitary: |(U^dag U - I)[" + std::to_string(wi) + "][" +
                       std::to_string(wj) + "]| = " + std::to_string(worst));
  }

  static UnitaryMatrix identity(std::size_t dim) {
    std::vector<cx> m(dim * dim, cx{0, 0});
    for (std::size_t i = 0; i < dim; ++i) m[i * dim + i] = cx{1, 0};
    return UnitaryMatrix(dim, std::move(m));
  }

  std::size_t dim() const { return dim_; }
  cx at(std::size_t i, std::size_t j) const { return m_[i * dim_ + j]; }
  const std::vector<cx>& entries() const { return m_; }

 private:
  std::size_t dim_;
  std::vector<cx> m_;
};

inline StateVector apply_unitary(const UnitaryMatrix& u, const StateVector& psi) {
  if (u.dim() != psi.dim()) throw DimensionMismatch("apply_unitary: dimension mismatch");
  std::vector<cx> out(u.dim(), cx{0, 0});
  for (std::size_t i = 0; i < u.dim(); ++i)
    for (std::size_t j = 0; j < u.dim(); ++j) out[i] += u.at(i, j) * psi[j];
  return StateVector(std::move(out));
}

// Kronecker product of raw row-major square matrices.
inline std::vector<cx> kron_entries(const std::vector<cx>& a, std::size_t da,
                                    const std::vector<cx>& b, std::size_t db) {
  const std::size_t d = da * db;
  std::vector<cx> out(d * d);
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < da; ++j)
      for (std::size_t k = 0; k < db; ++k)
        for (std::size_t l = 0; l < db; ++l)
          out[(i * db + k) * d + (j * db + l)] = a[i * da + j] * b[k * db + l];
  return out;
}

// ---------------------------------------------------------------------------
// Measurement of the photon inside a (photon x probe) joint state

struct MeasurementResult {
  int outcome;             // label 0..3 in the measured basis
  double probability;      // Born probability of that outcome
  StateVector post_state;  // collapsed joint state
};

// Born probabilities of the four photon outcomes, probe traced out implicitly.
inline std::array<double, 4> outcome_probabilities(const StateVector& joint, ProductBasis basis) {
  if (joint.dim() % kPhotonDim != 0)
    throw DimensionMismatch("outcome_probabilities: joint dimension is not a multiple of 4");
  const std::size_t pd = joint.dim() / kPhotonDim;
  const auto vs = basis_vectors(basis);
  std::array<double, 4> probs{};
  for (int label = 0; label < 4; ++label) {
    double p = 0.0;
    for (std::size_t k = 0; k < pd; ++k) {
      cx c{0, 0};
      for (std::size_t j = 0; j < kPhotonDim; ++j) c += std::conj(vs[label][j]) * joint[j * pd + k];
      p += std::norm(c);
    }
    probs[label] = p;
  }
  return probs;
}

// Probability and collapsed state of a specific photon outcome. Returns
// nullopt when the projected component has norm below kCollapseFloor.
inline std::optional<MeasurementResult> photon_collapse(const StateVector& joint,
                                                        ProductBasis basis, int label) {
  if (label < 0 || label > 3) throw DimensionMismatch("photon_collapse: label out of range");
  if (joint.dim() % kPhotonDim != 0)
    throw DimensionMismatch("photon_collapse: joint dimension is not a multiple of 4");
  const std::size_t pd = joint.dim() / kPhotonDim;
  const StateVector v = basis_vectors(basis)[label];

  std::vector<cx> cond(pd, cx{0, 0});  // probe amplitudes conditioned on the outcome
  for (std::size_t k = 0; k < pd; ++k)
    for (std::size_t j = 0; j < kPhotonDim; ++j) cond[k] += std::conj(v[j]) * joint[j * pd + k];
  double p = 0.0;
  for (const cx& c : cond) p += std::norm(c);
  if (std::sqrt(p) < kCollapseFloor) return std::nullopt;

  const double inv = 1.0 / std::sqrt(p);
  std::vector<cx> post(joint.dim(), cx{0, 0});
  for (std::size_t j = 0; j < kPhotonDim; ++j)
    for (std::size_t k = 0; k < pd; ++k) post[j * pd + k] = v[j] * cond[k] * inv;
  return MeasurementResult{label, p, StateVector(std::move(post))};
}

// Sample one projective measurement of the photon.
inline MeasurementResult measure(const StateVector& joint, ProductBasis basis, RandomStream& rng) {
  const auto probs = outcome_probabilities(joint, basis);
  const std::size_t outcome =
      sample_discrete(std::vector<double>(probs.begin(), probs.end()), rng);
  auto r = photon_collapse(joint, basis, static_cast<int>(outcome));
  if (!r) throw DegenerateState("measure: sampled outcome has numerically zero weight");
  return *r;
}

// ---------------------------------------------------------------------------
// Density matrices and information metrics

class DensityMatrix {
 public:
  // Row-major entries; validates hermiticity and unit trace within kNormTol.
  DensityMatrix(std::size_t dim, std::vector<cx> entries) : dim_(dim), m_(std::move(entries)) {
    if (dim_ == 0 || m_.size() != dim_ * dim_)
      throw DimensionMismatch("density matrix: entry count does not match dimension");
    double tr = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = 0; j < dim_; ++j) {
        const cx& a = m_[i * dim_ + j];
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
          throw StateError("density matrix: non-finite entry");
        if (std::abs(a - std::conj(m_[j * dim_ + i])) > kNormTol)
          throw StateError("density matrix is not hermitian");
      }
      tr += m_[i * dim_ + i].real();
      if (std::abs(m_[i * dim_ + i].imag()) > kNormTol)
        throw StateError("density matrix has complex diagonal");
    }
    if (std::abs(tr - 1.0) > kNormTol)
      throw StateError("density matrix trace is " + std::to_string(tr) + ", expected 1");
  }

  static DensityMatrix from_pure(const StateVector& psi) {
    std::vector<cx> m(psi.dim() * psi.dim());
    for (std::size_t i = 0; i < psi.dim(); ++i)
      for (std::size_t j = 0; j < psi.dim(); ++j) m[i * psi.dim() + j] = psi[i] * std::conj(psi[j]);
    return DensityMatrix(psi.dim(), std::move(m));
  }

  std::size_t dim() const { return dim_; }
  cx at(std::size_t i, std::size_t j) const { return m_[i * dim_ + j]; }
  const std::vector<cx>& entries() const { return m_; }

 private:
  std::size_t dim_;
  std::vector<cx> m_;
};

// Partial trace of a pure state over the subsystems not listed in `keep`.
// `dims` are the subsystem dimensions in tensor order (their product must be
// the state dimension); `keep` lists subsystem indices to retain, and the
// reduced matrix uses them in the order given.
inline DensityMatrix reduce_to_density(const StateVector& psi, const std::vector<std::size_t>& dims,
                                       const std::vector<std::size_t>& keep) {
  std::size_t total = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw DimensionMismatch("reduce_to_density: zero subsystem dimension");
    total *= d;
  }
  if (total != psi.dim())
    throw DimensionMismatch("reduce_to_density: subsystem dimensions do not factor the state");
  if (keep.empty()) throw DimensionMismatch("reduce_to_density: nothing kept");
  std::vector<bool> kept(dims.size(), false);
  for (std::size_t s : keep) {
    if (s >= dims.size()) throw DimensionMismatch("reduce_to_density: keep index out of range");
    if (kept[s]) throw DimensionMismatch("reduce_to_density: duplicate keep index");
    kept[s] = true;
  }

  // strides of each subsystem in the flat index (row-major / big-endian)
  std::vector<std::size_t> stride(dims.size(), 1);
  for (std::size_t s = dims.size(); s-- > 1;) stride[s - 1] = stride[s] * dims[s];

  std::size_t kdim = 1;
  for (std::size_t s : keep) kdim *= dims[s];

  // flat index -> (kept mixed-radix index, traced mixed-radix index)
  std::vector<std::size_t> kidx(total), tidx(total);
  for (std::size_t g = 0; g < total; ++g) {
    std::size_t k = 0;
    for (std::size_t s : keep) k = k * dims[s] + (g / stride[s]) % dims[s];
    std::size_t t = 0;
    for (std::size_t s = 0; s < dims.size(); ++s)
      if (!kept[s]) t = t * dims[s] + (g / stride[s]) % dims[s];
    kidx[g] = k;
    tidx[g] = t;
  }

  std::vector<cx> rho(kdim * kdim, cx{0, 0});
  for (std::size_t g1 = 0; g1 < total; ++g1) {
    if (psi[g1] == cx{0, 0}) continue;
    for (std::size_t g2 = 0; g2 < total; ++g2) {
      if (tidx[g1] != tidx[g2]) continue;
      rho[kidx[g1] * kdim + kidx[g2]] += psi[g1] * std::conj(psi[g2]);
    }
  }
  return DensityMatrix(kdim, std::move(rho));
}

// Probe marginal of a (photon x probe) joint state.
inline DensityMatrix probe_state(const StateVector& joint) {
  if (joint.dim() % kPhotonDim != 0)
    throw DimensionMismatch("probe_state: joint dimension is not a multiple of 4");
  return reduce_to_density(joint, {kPhotonDim, joint.dim() / kPhotonDim}, {1});
}

// Eigenvalues of a hermitian matrix (row-major entries), ascending.
//
// Cyclic Jacobi with complex rotations: for each off-diagonal pivot a_pq =
// r e^{i phi}, a 2x2 unitary with the phase folded in zeroes that entry; the
// off-diagonal Frobenius mass is monotonically annihilated. Dimensions here
// are at most 64, for which this converges in a handful of sweeps.
inline std::vector<double> hermitian_eigenvalues(std::vector<cx> a, std::size_t n) {
  if (n == 0 || a.size() != n * n)
    throw DimensionMismatch("hermitian_eigenvalues: bad matrix size");
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off2 = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off2 += std::norm(a[p * n + q]);
    if (off2 < 1e-30) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cx apq = a[p * n + q];
        const double r = std::abs(apq);
        if (r < 1e-18) continue;
        const cx phase = apq / r;
        const double app = a[p * n + p].real();
        const double aqq = a[q * n + q].real();
        const double theta = 0.5 * std::atan2(2.0 * r, app - aqq);
        const double c = std::cos(theta), s = std::sin(theta);
        // columns p,q then rows p,q of the similarity transform
        for (std::size_t k = 0; k < n; ++k) {
          const cx hkp = a[k * n + p], hkq = a[k * n + q];
          a[k * n + p] = c * hkp + s * std::conj(phase) * hkq;
          a[k * n + q] = -s * phase * hkp + c * hkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cx hpk = a[p * n + k], hqk = a[q * n + k];
          a[p * n + k] = c * hpk + s * phase * hqk;
          a[q * n + k] = -s * std::conj(phase) * hpk + c * hqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i * n + i].real();
  std::sort(ev.begin(), ev.end());
  return ev;
}

// Trace distance (1/2)*||rho - sigma||_1.
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("trace_distance: dimension mismatch");
  std::vector<cx> diff(rho.entries());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= sigma.entries()[i];
  double td = 0.0;
  for (double ev : hermitian_eigenvalues(std::move(diff), rho.dim())) td += std::abs(ev);
  return 0.5 * td;
}

// Von Neumann entropy in bits; eigenvalues at or below kEigClamp count as 0.
inline double vn_entropy_bits(const DensityMatrix& rho) {
  double s = 0.0;
  for (double ev : hermitian_eigenvalues(rho.entries(), rho.dim()))
    if (ev > kEigClamp) s -= ev * std::log2(ev);
  return s;
}

// Holevo bound chi = S(avg rho) - sum_i p_i S(rho_i), in bits.
inline double holevo(const std::vector<std::pair<double, DensityMatrix>>& ensemble) {
  if (ensemble.empty()) throw InvalidDistribution("holevo: empty ensemble");
  const std::size_t d = ensemble.front().second.dim();
  double psum = 0.0;
  for (const auto& [p, rho] : ensemble) {
    if (rho.dim() != d) throw DimensionMismatch("holevo: mixed ensemble dimensions");
    if (p < -1e-12) throw InvalidDistribution("holevo: negative weight");
    psum += p;
  }
  if (std::abs(psum - 1.0) > kNormTol)
    throw InvalidDistribution("holevo: weights sum to " + std::to_string(psum));

  std::vector<cx> avg(d * d, cx{0, 0});
  double cond = 0.0;
  for (const auto& [p, rho] : ensemble) {
    if (p <= 0.0) continue;
    for (std::size_t i = 0; i < d * d; ++i) avg[i] += p * rho.entries()[i];
    cond += p * vn_entropy_bits(rho);
  }
  const double chi = vn_entropy_bits(DensityMatrix(d, std::move(avg))) - cond;
  // mathematically >= 0; clip the rounding dust so callers can rely on it
  return chi > 0.0 ? chi : 0.0;
}

// <phi| rho |phi>
inline double fidelity_with_pure(const DensityMatrix& rho, const StateVector& phi) {
  if (rho.dim() != phi.dim()) throw DimensionMismatch("fidelity_with_pure: dimension mismatch");
  cx f{0, 0};
  for (std::size_t i = 0; i < rho.dim(); ++i)
    for (std::size_t j = 0; j < rho.dim(); ++j) f += std::conj(phi[i]) * rho.at(i, j) * phi[j];
  return f.real();
}

// ---------------------------------------------------------------------------
// Haar-distributed random unitaries (Ginibre ensemble + QR with the
// R-diagonal phase convention fixed to be real positive).

inline UnitaryMatrix haar_random_unitary(std::size_t dim, RandomStream& rng) {
  if (dim == 0) throw DimensionMismatch("haar_random_unitary: zero dimension");
  auto gauss_pair = [&rng]() {
    const double u1 = 1.0 - rng.next_double();  // (0,1]
    const double u2 = rng.next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return cx{r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
  };
  std::vector<cx> g(dim * dim);
  for (cx& e : g) e = gauss_pair();

  // modified Gram-Schmidt on columns, two passes for orthogonality at 1e-14
  for (std::size_t j = 0; j < dim; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        cx proj{0, 0};
        for (std::size_t k = 0; k < dim; ++k) proj += std::conj(g[k * dim + i]) * g[k * dim + j];
        for (std::size_t k = 0; k < dim; ++k) g[k * dim + j] -= proj * g[k * dim + i];
      }
    }
    double norm2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) norm2 += std::norm(g[k * dim + j]);
    if (norm2 < 1e-24) throw DegenerateState("haar_random_unitary: degenerate sample");
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t k = 0; k < dim; ++k) g[k * dim + j] *= inv;
  }
  return UnitaryMatrix(dim, std::move(g));
}

// Haar-distributed random pure state.
inline StateVector haar_random_state(std::size_t dim, RandomStream& rng) {
  if (dim == 0) throw DimensionMismatch("haar_random_state: zero dimension");
  auto gauss_pair = [&rng]() {
    const double u1 = 1.0 - rng.next_double();
    const double u2 = rng.next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return cx{r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
  };
  std::vector<cx> v(dim);
  double norm2 = 0.0;
  for (cx& e : v) {
    e = gauss_pair();
    norm2 += std::norm(e);
  }
  if (norm2 < 1e-24) throw DegenerateState("haar_random_state: degenerate sample");
  const double inv = 1.0 / std::sqrt(norm2);
  for (cx& e : v) e *= inv;
  return StateVector(std::move(v));
}

}  // namespace sqkd
