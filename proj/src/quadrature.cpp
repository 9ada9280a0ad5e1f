#include "polycycle/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <sstream>

#include "polycycle/errors.hpp"

namespace polycycle {

QuadratureResult integrate_gk(const std::function<double(double)>& f, double a, double b,
                              const QuadratureOptions& opt) {
    if (a == b) return {0.0, 0.0};
    double error = 0.0, l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
        f, a, b, opt.max_depth, opt.rel_tol, &error, &l1);
    // Relative to the integral of |f|: a cancelling integrand cannot do better than that.
    if (!std::isfinite(value) || error > std::max(opt.abs_tol, opt.rel_tol * l1)) {
        std::ostringstream os;
        os << "quadrature on [" << a << ", " << b << "] did not converge (estimate " << value
           << ", error " << error << ")";
        throw ToleranceError(os.str());
    }
    return {value, error};
}

}  // namespace polycycle
