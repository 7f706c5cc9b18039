#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "refprice/market.hpp"

namespace refprice {

/// Time-indexed record of a simulation or dynamics run. Column t (1-based
/// period) is implicit: row k holds period k+1. Prices and the reference
/// price are post-projection and always lie in the box; y1/y2 are the
/// pre-projection proxies whose projection produced p1/p2.
struct Trajectory {
    MarketParams params;
    std::vector<double> p1, p2, r;
    std::vector<double> y1, y2;
    std::vector<double> g1, g2, gn;
    std::vector<double> d1, d2;
    std::vector<double> rev1, rev2;
    std::string sched1_desc, sched2_desc, schedn_desc;

    explicit Trajectory(const MarketParams& p) : params(p) {}

    std::size_t size() const { return p1.size(); }

    void reserve(std::size_t n) {
        for (auto* col : {&p1, &p2, &r, &y1, &y2, &g1, &g2, &gn, &d1, &d2, &rev1, &rev2})
            col->reserve(n);
    }

    /// Appends one fully-evaluated period; demands, revenues and gradients
    /// are computed from the given state.
    void push_period(double p1_, double p2_, double r_, double y1_, double y2_) {
        p1.push_back(p1_);
        p2.push_back(p2_);
        r.push_back(r_);
        y1.push_back(y1_);
        y2.push_back(y2_);
        g1.push_back(gradient(params, Firm::one, p1_, p2_, r_));
        g2.push_back(gradient(params, Firm::two, p1_, p2_, r_));
        gn.push_back(nature_gradient(params, p1_, p2_, r_));
        d1.push_back(demand(params, Firm::one, p1_, p2_, r_));
        d2.push_back(demand(params, Firm::two, p2_, p1_, r_));
        rev1.push_back(revenue(params, Firm::one, p1_, p2_, r_));
        rev2.push_back(revenue(params, Firm::two, p1_, p2_, r_));
    }
};

} // namespace refprice
