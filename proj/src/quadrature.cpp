#include "anlg/quadrature.hpp"

#include "anlg/gauss.hpp"

namespace anlg {

namespace {

void push_orthants(AnnulusRule& rule, const Anisotropy& a, const Vec& y_abs, double w,
                   double rho) {
    int n = a.n;
    int count = 1 << n;
    for (int mask = 0; mask < count; ++mask) {
        AnnulusNode node{y_abs, w, rho};
        for (int i = 0; i < n; ++i)
            if (mask & (1 << i)) node.z[i] = -node.z[i];
        rule.nodes.push_back(node);
    }
}

}  // namespace

AnnulusRule make_annulus_rule(const Anisotropy& a, int radial_order, int angular_order) {
    AnnulusRule rule;
    Rule1D gr = gauss_legendre_ab(radial_order, 1.0, 2.0);
    const int n = a.n;

    if (n == 1) {
        double b = a.bi(0);
        for (size_t ir = 0; ir < gr.x.size(); ++ir) {
            double rho = gr.x[ir];
            double w = gr.w[ir] * (2.0 / b) * std::pow(rho, a.c - 1.0);
            Vec y = vec({std::pow(rho, 2.0 / b)});
            push_orthants(rule, a, y, w, rho);
        }
    } else if (n == 2) {
        double b1 = a.bi(0), b2 = a.bi(1);
        // Panel where a_1 = tau^{b1} <= 1/2, and its mirror with the axes
        // swapped; the substitution makes y linear in tau near the corner.
        for (int panel = 0; panel < 2; ++panel) {
            double bp = panel == 0 ? b1 : b2;  // axis resolved by tau
            double bq = panel == 0 ? b2 : b1;
            double tau_max = std::pow(0.5, 1.0 / bp);
            Rule1D gt = gauss_legendre_ab(angular_order, 0.0, tau_max);
            for (size_t ir = 0; ir < gr.x.size(); ++ir) {
                double rho = gr.x[ir];
                double radial = gr.w[ir] * std::pow(rho, a.c - 1.0);
                for (size_t it = 0; it < gt.x.size(); ++it) {
                    double tau = gt.x[it];
                    double ap = std::pow(tau, bp);        // resolved simplex coord
                    double aq = 1.0 - ap;
                    double yp = std::pow(rho, 2.0 / bp) * tau;
                    double yq = std::pow(rho, 2.0 / bq) * std::pow(aq, 1.0 / bq);
                    double w = radial * gt.w[it] * (2.0 / bq) * std::pow(aq, 1.0 / bq - 1.0);
                    Vec y = panel == 0 ? vec({yp, yq}) : vec({yq, yp});
                    push_orthants(rule, a, y, w, rho);
                }
            }
        }
    } else if (n == 3) {
        double b1 = a.bi(0), b2 = a.bi(1), b3 = a.bi(2);
        double a1 = 1.0 / b1, a2 = 1.0 / b2, a3 = 1.0 / b3;
        double base = 2.0 / (b1 * b2 * b3);
        // Stick-breaking: s1 = xi1, s2 = (1-xi1) xi2, s3 = (1-xi1)(1-xi2);
        // the density separates into two Beta factors handled per panel.
        for (int p1 = 0; p1 < 2; ++p1) {
            double g1 = p1 == 0 ? a1 : a2 + a3;
            double t1max = std::pow(0.5, g1);
            Rule1D gt1 = gauss_legendre_ab(angular_order, 0.0, t1max);
            for (int p2 = 0; p2 < 2; ++p2) {
                double g2 = p2 == 0 ? a2 : a3;
                double t2max = std::pow(0.5, g2);
                Rule1D gt2 = gauss_legendre_ab(angular_order, 0.0, t2max);
                for (size_t ir = 0; ir < gr.x.size(); ++ir) {
                    double rho = gr.x[ir];
                    double radial = gr.w[ir] * std::pow(rho, a.c - 1.0);
                    for (size_t i1 = 0; i1 < gt1.x.size(); ++i1) {
                        double t1 = gt1.x[i1];
                        double xi1 = p1 == 0 ? std::pow(t1, 1.0 / g1) : 1.0 - std::pow(t1, 1.0 / g1);
                        double w1 = p1 == 0 ? (1.0 / a1) * std::pow(1.0 - xi1, a2 + a3 - 1.0)
                                            : (1.0 / (a2 + a3)) * std::pow(xi1, a1 - 1.0);
                        for (size_t i2 = 0; i2 < gt2.x.size(); ++i2) {
                            double t2 = gt2.x[i2];
                            double xi2 =
                                p2 == 0 ? std::pow(t2, 1.0 / g2) : 1.0 - std::pow(t2, 1.0 / g2);
                            double w2 = p2 == 0 ? (1.0 / a2) * std::pow(1.0 - xi2, a3 - 1.0)
                                                : (1.0 / a3) * std::pow(xi2, a2 - 1.0);
                            double s1 = xi1, s2 = (1.0 - xi1) * xi2, s3 = (1.0 - xi1) * (1.0 - xi2);
                            Vec y = vec({std::pow(rho, 2.0 / b1) * std::pow(s1, a1),
                                         std::pow(rho, 2.0 / b2) * std::pow(s2, a2),
                                         std::pow(rho, 2.0 / b3) * std::pow(s3, a3)});
                            double w = base * radial * w1 * gt1.w[i1] * w2 * gt2.w[i2];
                            push_orthants(rule, a, y, w, rho);
                        }
                    }
                }
            }
        }
    } else {
        throw std::invalid_argument("make_annulus_rule: dimension must be 1..3");
    }

    for (const auto& node : rule.nodes) rule.measure += node.w;
    return rule;
}

KernelMoments kernel_moments(const Anisotropy& a, const AnnulusRule& rule) {
    KernelMoments m;
    for (const auto& node : rule.nodes) {
        double k0 = std::pow(node.rho, -(a.c + a.s));
        m.A_shell += node.w * k0;
        for (int i = 0; i < a.n; ++i) m.J[static_cast<size_t>(i)] += node.w * sq(node.z[i]) * k0;
    }
    return m;
}

double inner_moment(const Anisotropy& a, const KernelMoments& m, int axis, double r) {
    double e = 4.0 / a.bi(axis) - a.s;
    return m.J[static_cast<size_t>(axis)] * std::pow(r, e) / (std::pow(2.0, e) - 1.0);
}

double inner_moment_sum(const Anisotropy& a, const KernelMoments& m, double r) {
    double t = 0;
    for (int i = 0; i < a.n; ++i) t += inner_moment(a, m, i, r);
    return t;
}

}  // namespace anlg
