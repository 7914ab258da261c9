#pragma once

// Straight-line miniature of the decision/diffusion model, used as an
// enumeration oracle on instances of at most a handful of agents. Kept
// deliberately independent of the library implementation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace lmsim::test {

struct TinyAgent {
    std::vector<double> w;
    std::vector<double> e; // motive-major
    int choice{0};
    double pers{1.0};
};

inline double tiny_satisfaction(const TinyAgent& a, std::size_t alt, std::size_t alts) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t m = 0; m < a.w.size(); ++m) {
        num += a.w[m] * a.e[m * alts + alt];
        den += a.w[m];
    }
    return den == 0.0 ? 0.0 : num / den;
}

inline double tiny_dissonance(const TinyAgent& a, std::size_t alt, std::size_t alts) {
    double pos = 0.0;
    double neg = 0.0;
    for (std::size_t m = 0; m < a.w.size(); ++m) {
        double e = a.e[m * alts + alt];
        if (e > 0.0) pos += a.w[m] * e;
        if (e < 0.0) neg += a.w[m] * -e;
    }
    return pos + neg == 0.0 ? 0.0 : 2.0 * std::min(pos, neg) / (pos + neg);
}

inline int tiny_choose(const TinyAgent& a, std::size_t alts) {
    int best = 0;
    for (std::size_t alt = 1; alt < alts; ++alt) {
        double s = tiny_satisfaction(a, alt, alts);
        double sb = tiny_satisfaction(a, static_cast<std::size_t>(best), alts);
        if (s > sb || (s == sb && tiny_dissonance(a, alt, alts) <
                                      tiny_dissonance(a, static_cast<std::size_t>(best), alts))) {
            best = static_cast<int>(alt);
        }
    }
    return best;
}

/// One synchronous round over an undirected adjacency list (neighbor
/// lists ascending). Returns the number of changed choices.
inline int tiny_round(std::vector<TinyAgent>& agents, const std::vector<std::vector<int>>& adj,
                      double lambda, double threshold, std::size_t alts) {
    std::vector<TinyAgent> snap = agents;
    std::vector<int> role(agents.size(), 0); // 0 content, 1 inquire, 2 signal
    for (std::size_t i = 0; i < agents.size(); ++i) {
        double d = tiny_dissonance(snap[i], static_cast<std::size_t>(snap[i].choice), alts);
        if (d < threshold) {
            continue;
        }
        bool dissatisfied = false;
        double sc = tiny_satisfaction(snap[i], static_cast<std::size_t>(snap[i].choice), alts);
        for (std::size_t alt = 0; alt < alts; ++alt) {
            dissatisfied = dissatisfied || tiny_satisfaction(snap[i], alt, alts) > sc;
        }
        role[i] = dissatisfied ? 1 : 2;
    }
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (role[i] == 1 && !adj[i].empty()) {
            int source = adj[i].front();
            for (int cand : adj[i]) {
                if (snap[static_cast<std::size_t>(cand)].pers >
                    snap[static_cast<std::size_t>(source)].pers) {
                    source = cand;
                }
            }
            const TinyAgent& src = snap[static_cast<std::size_t>(source)];
            std::size_t alt = static_cast<std::size_t>(snap[i].choice);
            for (std::size_t m = 0; m < agents[i].w.size(); ++m) {
                double& e = agents[i].e[m * alts + alt];
                e = std::clamp((1.0 - lambda) * e + lambda * src.pers * src.e[m * alts + alt],
                               -1.0, 1.0);
            }
        }
        for (int s : adj[i]) {
            if (role[static_cast<std::size_t>(s)] != 2) {
                continue;
            }
            const TinyAgent& src = snap[static_cast<std::size_t>(s)];
            std::size_t alt = static_cast<std::size_t>(src.choice);
            for (std::size_t m = 0; m < agents[i].w.size(); ++m) {
                double& e = agents[i].e[m * alts + alt];
                e = std::clamp((1.0 - lambda) * e + lambda * src.pers * src.e[m * alts + alt],
                               -1.0, 1.0);
            }
        }
    }
    int changed = 0;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        agents[i].choice = tiny_choose(agents[i], alts);
        changed += agents[i].choice != snap[i].choice;
    }
    return changed;
}

} // namespace lmsim::test
