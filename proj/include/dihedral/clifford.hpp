#pragma once

// Concrete complex Clifford modules for Cl(R^n), n even, and the local boundary
// condition on the tensor fiber S̄ ⊗ S.
//
// Generators are c_k = i γ_k where γ_{2j-1}, γ_{2j} are the Jordan-Wigner
// matrices σ3^{⊗(j-1)} ⊗ σ1 (resp. σ2) ⊗ I^{⊗(n/2-j)}. They are skew-adjoint
// and satisfy c_i c_j + c_j c_i = -2 δ_ij.

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "jet.hpp"

namespace dihedral {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Kronecker product A ⊗ B (row index of A major).
inline CMat kron(const CMat& A, const CMat& B)
{
    CMat K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

struct CliffordModule {
    int n = 0;
    std::vector<CMat> generators; ///< c(e_1) .. c(e_n)
    CMat grading;                 ///< ε

    Eigen::Index fiber_dim() const { return grading.rows(); }

    /// Clifford multiplication by a vector.
    CMat act(const Vec& v) const
    {
        if (v.size() != n) throw InputError("vector length does not match the Clifford module");
        CMat m = CMat::Zero(fiber_dim(), fiber_dim());
        for (int k = 0; k < n; ++k) m += v[k] * generators[static_cast<std::size_t>(k)];
        return m;
    }

    /// Clifford multiplication by the basis monomial e_I (indices increasing, 0-based).
    CMat monomial(const std::vector<int>& I) const
    {
        CMat m = CMat::Identity(fiber_dim(), fiber_dim());
        for (int k : I) m = m * generators.at(static_cast<std::size_t>(k));
        return m;
    }
};

/// Clifford module for Cl(R^n) on C^{2^{n/2}}. n must be even and at most 8.
inline CliffordModule clifford_module(int n)
{
    if (n < 2 || n % 2 != 0 || n > 8)
        throw InputError("Clifford modules are built for even n in 2..8, got " + std::to_string(n));
    const cplx I(0.0, 1.0);
    CMat s1(2, 2), s2(2, 2), s3(2, 2);
    s1 << 0, 1, 1, 0;
    s2 << 0, -I, I, 0;
    s3 << 1, 0, 0, -1;
    const CMat id2 = CMat::Identity(2, 2);
    const int half = n / 2;

    CliffordModule m;
    m.n = n;
    for (int j = 0; j < half; ++j)
        for (const CMat* s : {&s1, &s2}) {
            CMat g = CMat::Identity(1, 1);
            for (int k = 0; k < half; ++k) g = kron(g, k < j ? s3 : (k == j ? *s : id2));
            m.generators.push_back(I * g);
        }
    // ε = i^{n/2} c_1 ⋯ c_n
    cplx phase = 1.0;
    for (int k = 0; k < half; ++k) phase *= I;
    CMat prod = CMat::Identity(1 << half, 1 << half);
    for (const auto& c : m.generators) prod = prod * c;
    m.grading = phase * prod;
    return m;
}

/// The dual module on S*: c*(v) = c(v)^T, ε* = ε^T.
inline CliffordModule dual_module(const CliffordModule& m)
{
    CliffordModule d;
    d.n = m.n;
    for (const auto& c : m.generators) d.generators.push_back(c.transpose());
    d.grading = m.grading.transpose();
    return d;
}

/// Largest residual of the module relations: anticommutation, skew-adjointness, ε² = 1, ε c = -c ε.
inline double clifford_residual(const CliffordModule& m)
{
    const auto d = m.fiber_dim();
    const CMat id = CMat::Identity(d, d);
    double r = (m.grading * m.grading - id).cwiseAbs().maxCoeff();
    r = std::max(r, (m.grading - m.grading.adjoint()).cwiseAbs().maxCoeff());
    for (int i = 0; i < m.n; ++i) {
        const CMat& ci = m.generators[static_cast<std::size_t>(i)];
        r = std::max(r, (ci + ci.adjoint()).cwiseAbs().maxCoeff());
        r = std::max(r, (m.grading * ci + ci * m.grading).cwiseAbs().maxCoeff());
        for (int j = 0; j < m.n; ++j) {
            const CMat& cj = m.generators[static_cast<std::size_t>(j)];
            r = std::max(r, (ci * cj + cj * ci + (i == j ? 2.0 : 0.0) * id).cwiseAbs().maxCoeff());
        }
    }
    return r;
}

struct BoundaryProjector {
    CMat involution; ///< (ε̄ ⊗ ε)(c̄(ē_n) ⊗ c(e_n))
    CMat projector;  ///< Π = (1 - involution) / 2, onto ker(1 + involution)
    Vec normal_bar, normal;
};

/// Orthogonal projector onto the boundary condition B ⊂ S̄ ⊗ S.
inline BoundaryProjector boundary_projector(const CliffordModule& Sbar, const CliffordModule& S, const Vec& nbar, const Vec& n)
{
    for (const Vec* v : {&nbar, &n})
        if (std::abs(v->norm() - 1.0) > 1e-10) throw InputError("boundary normals must be unit vectors");
    BoundaryProjector b;
    b.normal_bar = nbar;
    b.normal = n;
    b.involution = kron(Sbar.grading * Sbar.act(nbar), S.grading * S.act(n));
    const auto d = b.involution.rows();
    b.projector = 0.5 * (CMat::Identity(d, d) - b.involution);
    return b;
}

/// Numerical rank of a complex matrix.
inline Eigen::Index complex_rank(const CMat& m, double tol = 1e-10)
{
    Eigen::ColPivHouseholderQR<CMat> qr(m);
    qr.setThreshold(tol);
    return qr.rank();
}

/// The identification Φ: Cl(R^n) → S ⊗ S*, e_I ↦ c(e_I) viewed as Σ (e_I s_j) ⊗ s_j*.
/// Column k of `matrix` is Φ of the k-th basis monomial; vectorisation is row-major
/// (entry (i,j) of an endomorphism sits at i*d + j, pairing s_i with s_j*).
struct FormsIsomorphism {
    int n = 0;
    CliffordModule S, Sdual;
    std::vector<std::vector<int>> basis; ///< monomials e_I in order of increasing bitmask
    CMat matrix;

    /// Whether e_I is tangential to the boundary with normal e_n (I avoids the last index).
    bool tangential(std::size_t k) const
    {
        for (int i : basis[k])
            if (i == n - 1) return false;
        return true;
    }
};

inline FormsIsomorphism forms_isomorphism(int n)
{
    if (n < 2 || n % 2 != 0 || n > 6) throw InputError("forms isomorphism is built for even n in 2..6");
    FormsIsomorphism f;
    f.n = n;
    f.S = clifford_module(n);
    f.Sdual = dual_module(f.S);
    const auto d = f.S.fiber_dim();
    f.matrix.resize(d * d, 1 << n);
    for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<int> I;
        for (int k = 0; k < n; ++k)
            if (mask & (1 << k)) I.push_back(k);
        const CMat c = f.S.monomial(I);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) f.matrix(i * d + j, mask) = c(i, j);
        f.basis.push_back(I);
    }
    return f;
}

} // namespace dihedral
