#pragma once

// Core scalar/matrix aliases and the 2x2 dq-frame block type shared by all
// analysis stages. Bus quantities are ordered (q, d); an n-bus system maps to
// 2n x 2n complex matrices with one 2x2 block per bus pair.

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace gridmodes {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using MatX = Eigen::MatrixXcd;
using VecX = Eigen::VectorXcd;

/// Error with a stable machine-readable code (dot-separated, e.g.
/// "io.not_found") in addition to the human message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Whether a DqBlock's entries are siemens or ohms.
enum class DqRole { admittance, impedance };

/// One 2x2 complex block in the synchronous dq frame, entries (qq qd; dq dd).
struct DqBlock {
    Mat2 m = Mat2::Zero();
    DqRole role = DqRole::admittance;

    static DqBlock admittance(const Mat2& v) { return {v, DqRole::admittance}; }
    static DqBlock impedance(const Mat2& v) { return {v, DqRole::impedance}; }

    cplx qq() const { return m(0, 0); }
    cplx qd() const { return m(0, 1); }
    cplx dq() const { return m(1, 0); }
    cplx dd() const { return m(1, 1); }

    bool finite() const {
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                if (!std::isfinite(m(r, c).real()) || !std::isfinite(m(r, c).imag()))
                    return false;
        return true;
    }

    /// Inverse block with the role flipped. Throws element.singular when the
    /// block cannot be inverted.
    DqBlock inverse() const {
        const cplx det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        if (std::abs(det) == 0.0 || !std::isfinite(std::abs(det)))
            throw Error("element.singular", "2x2 dq block is singular (det = 0)");
        Mat2 inv;
        inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
        inv /= det;
        return {inv, role == DqRole::admittance ? DqRole::impedance : DqRole::admittance};
    }

    /// Same numeric content expressed in the requested role, inverting when
    /// needed.
    DqBlock as(DqRole target) const { return role == target ? *this : inverse(); }
};

inline Mat2 dq_scalar_pair(cplx diag, double coupling) {
    Mat2 m;
    m << diag, cplx(coupling), cplx(-coupling), diag;
    return m;
}

} // namespace gridmodes
