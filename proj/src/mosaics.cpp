#include "hornce/mosaics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"

namespace hornce {

bool Neighborhood::operator<(const Neighborhood &o) const {
    return std::tie(has_pred, tminus, rho, t, S) < std::tie(o.has_pred, o.tminus, o.rho, o.t, o.S);
}

bool Neighborhood::operator==(const Neighborhood &o) const {
    return has_pred == o.has_pred && tminus == o.tminus && rho == o.rho && t == o.t && S == o.S;
}

bool nbh_leq(const Neighborhood &a, const Neighborhood &b) {
    if (a.t != b.t) return false;
    for (auto &s : a.S)
        if (!std::binary_search(b.S.begin(), b.S.end(), s)) return false;
    if (a.has_pred) return b.has_pred && a.rho == b.rho && a.tminus == b.tminus;
    return true;
}

std::string nbh_str(const Neighborhood &n) {
    std::string out = "(" + (n.has_pred ? names_str(n.tminus) : std::string("bot")) + ", " +
                      (n.has_pred ? roles_str(n.rho) : std::string("bot")) + ", " + names_str(n.t) + ", {";
    for (size_t i = 0; i < n.S.size(); ++i)
        out += (i ? ", (" : "(") + roles_str(n.S[i].first) + ", " + names_str(n.S[i].second) + ")";
    return out + "})";
}

std::vector<Neighborhood> enumerate_neighborhoods(const TypeGraph &g) {
    std::set<Neighborhood> out;
    auto base = [&](int n) {
        Neighborhood nb;
        nb.t = g.nodes[n].type;
        for (auto &[rho, c] : g.kids[n]) nb.S.push_back({rho, g.nodes[c].type});
        std::sort(nb.S.begin(), nb.S.end());
        nb.S.erase(std::unique(nb.S.begin(), nb.S.end()), nb.S.end());
        return nb;
    };
    out.insert(base(g.root));
    for (size_t p = 0; p < g.kids.size(); ++p)
        for (auto &[rho, c] : g.kids[p]) {
            Neighborhood nb = base(c);
            nb.has_pred = true;
            nb.tminus = g.nodes[p].type;
            nb.rho = rho;
            out.insert(nb);
        }
    return {out.begin(), out.end()};
}

std::vector<Neighborhood> enumerate_neighborhoods(const Reasoner &R1, const SymSet &t1) {
    return enumerate_neighborhoods(type_graph(R1, t1));
}

namespace {

RoleSet sig_part(const RoleSet &rho, const Signature &s) {
    RoleSet out;
    for (Role r : rho)
        if (s.has_role_any(r)) out.push_back(r);
    return out;
}

struct Obligation {
    int target;
    bool pred;
    std::vector<int> succ;
};

std::vector<Obligation> obligations(const MosaicSpace &sp, const Neighborhood &nb, uint64_t center,
                                    const std::vector<int> &index) {
    std::vector<Obligation> out;
    for (size_t i = 0; i < sp.universe.size(); ++i) {
        if (!((center >> i) & 1u)) continue;
        for (auto &[sigma, c] : sp.tg2.kids[sp.universe[i]]) {
            RoleSet ss = sig_part(sigma, sp.sig);
            if (ss.empty()) continue;
            Obligation ob{index[c], false, {}};
            if (nb.has_pred) {
                ob.pred = true;
                for (Role s : ss)
                    if (!set_has(nb.rho, inv(s))) ob.pred = false;
            }
            for (size_t j = 0; j < nb.S.size(); ++j)
                if (set_subset(ss, nb.S[j].first)) ob.succ.push_back(static_cast<int>(j));
            out.push_back(ob);
        }
    }
    return out;
}

bool met(const Obligation &ob, const std::vector<uint64_t> &ell) {
    uint64_t bit = uint64_t{1} << ob.target;
    if (ob.pred && (ell[0] & bit)) return true;
    for (int j : ob.succ)
        if (ell[2 + j] & bit) return true;
    return false;
}

std::vector<int> universe_index(const MosaicSpace &sp) {
    std::vector<int> index(sp.tg2.size(), -1);
    for (size_t i = 0; i < sp.universe.size(); ++i) index[sp.universe[i]] = static_cast<int>(i);
    return index;
}

uint64_t compat(const MosaicSpace &sp, const SymSet &t) {
    uint64_t m = 0;
    for (size_t i = 0; i < sp.universe.size(); ++i)
        if (set_subset(set_inter(sp.tg2.nodes[sp.universe[i]].type, sp.sig.concepts), t)) m |= uint64_t{1} << i;
    return m;
}

}  // namespace

MosaicSpace make_space(const TypeGraph &tg1, const TypeGraph &tg2, const Signature &sig) {
    MosaicSpace sp;
    sp.nbhs = enumerate_neighborhoods(tg1);
    sp.tg2 = tg2;
    sp.sig = sig;
    std::vector<char> seen(tg2.size(), 0);
    sp.universe.push_back(tg2.root);
    seen[tg2.root] = 1;
    for (size_t k = 0; k < sp.universe.size(); ++k)
        for (auto &[rho, c] : tg2.kids[sp.universe[k]])
            if (!seen[c] && !sig_part(rho, sig).empty()) {
                seen[c] = 1;
                sp.universe.push_back(c);
            }
    if (sp.universe.size() > 64) throw ResourceLimit("more than 64 connected type graph nodes");
    std::map<SymSet, int> types;
    std::map<RoleSet, int> roles;
    auto tid = [&](const SymSet &t) { return types.emplace(t, static_cast<int>(types.size())).first->second; };
    auto rid = [&](const RoleSet &r) { return roles.emplace(r, static_cast<int>(roles.size())).first->second; };
    for (const Neighborhood &nb : sp.nbhs) {
        MosaicSpace::Ids id{nb.has_pred ? tid(nb.tminus) : -1, nb.has_pred ? rid(nb.rho) : -1, tid(nb.t), {}};
        for (auto &[rho, t] : nb.S) id.S.push_back({rid(rho), tid(t)});
        sp.ids.push_back(id);
    }
    return sp;
}

bool check_condition_M(const MosaicSpace &sp, const Mosaic &m) {
    const Neighborhood &nb = sp.nbhs[m.nbh];
    if (m.ell.size() != nb.S.size() + 2) return false;
    for (size_t i = 0; i < sp.universe.size(); ++i)
        if (((m.ell[1] >> i) & 1u) &&
            !set_subset(set_inter(sp.tg2.nodes[sp.universe[i]].type, sp.sig.concepts), nb.t))
            return false;
    for (const Obligation &ob : obligations(sp, nb, m.ell[1], universe_index(sp)))
        if (!met(ob, m.ell)) return false;
    return true;
}

std::vector<Mosaic> enumerate_mosaics(const MosaicSpace &sp, MosaicStats &st, size_t cap) {
    std::vector<Mosaic> out;
    std::vector<int> index = universe_index(sp);
    size_t max_s = 0;
    for (size_t n = 0; n < sp.nbhs.size(); ++n) {
        const Neighborhood &nb = sp.nbhs[n];
        max_s = std::max(max_s, nb.S.size());
        size_t k = nb.S.size() + 2;
        std::vector<uint64_t> masks(k);
        masks[0] = nb.has_pred ? compat(sp, nb.tminus) : 0;
        masks[1] = compat(sp, nb.t);
        for (size_t j = 0; j < nb.S.size(); ++j) masks[2 + j] = compat(sp, nb.S[j].second);
        // Enumerate every position over the submasks of its compatible set; position 1 outermost.
        uint64_t center = masks[1];
        while (true) {
            std::vector<Obligation> obs = obligations(sp, nb, center, index);
            bool viable = true;
            for (const Obligation &ob : obs) {
                uint64_t bit = uint64_t{1} << ob.target;
                bool any = ob.pred && (masks[0] & bit);
                for (int j : ob.succ) any = any || (masks[2 + j] & bit);
                if (!any) viable = false;
            }
            if (viable) {
                std::vector<uint64_t> ell(k, 0);
                ell[1] = center;
                std::vector<size_t> order = {0};
                for (size_t j = 2; j < k; ++j) order.push_back(j);
                while (true) {
                    ++st.candidates;
                    if (cap && st.candidates > cap) throw ResourceLimit("mosaic candidate cap exceeded");
                    bool ok = true;
                    for (const Obligation &ob : obs)
                        if (!met(ob, ell)) {
                            ok = false;
                            break;
                        }
                    if (ok) out.push_back({static_cast<int>(n), ell});
                    size_t p = 0;
                    for (; p < order.size(); ++p) {
                        size_t pos = order[p];
                        if (ell[pos] == masks[pos]) {
                            ell[pos] = 0;
                            continue;
                        }
                        ell[pos] = (ell[pos] - masks[pos]) & masks[pos];
                        break;
                    }
                    if (p == order.size()) break;
                }
            }
            if (center == 0) break;
            center = (center - 1) & masks[1];
        }
    }
    std::sort(out.begin(), out.end());
    st.initial = out.size();
    st.bound_log2 = (sp.nbhs.empty() ? 0 : std::log2(static_cast<double>(sp.nbhs.size()))) +
                    static_cast<double>(sp.universe.size() * (max_s + 2));
    if (!out.empty() && std::log2(static_cast<double>(out.size())) > st.bound_log2 + 1e-9)
        throw std::logic_error("mosaic count exceeds the theoretical bound");
    return out;
}

namespace {

using Key = std::tuple<int, int, int, uint64_t, uint64_t>;

struct GoodIndex {
    // (t-, rho, t, ell(t-), ell(t)) of each mosaic with a predecessor.
    std::set<Key> as_child;
    // (t, rho', t', ell(t), ell(rho',t')) for each S entry of each mosaic.
    std::set<Key> as_parent;

    GoodIndex(const MosaicSpace &sp, const std::vector<Mosaic> &ms) {
        for (const Mosaic &m : ms) {
            const auto &id = sp.ids[m.nbh];
            if (sp.nbhs[m.nbh].has_pred) as_child.insert({id.tminus, id.rho, id.t, m.ell[0], m.ell[1]});
            for (size_t j = 0; j < id.S.size(); ++j)
                as_parent.insert({id.t, id.S[j].first, id.S[j].second, m.ell[1], m.ell[2 + j]});
        }
    }

    bool good(const MosaicSpace &sp, const Mosaic &m) const {
        const auto &id = sp.ids[m.nbh];
        for (size_t j = 0; j < id.S.size(); ++j)
            if (!as_child.count({id.t, id.S[j].first, id.S[j].second, m.ell[1], m.ell[2 + j]})) return false;
        if (sp.nbhs[m.nbh].has_pred && !as_parent.count({id.tminus, id.rho, id.t, m.ell[0], m.ell[1]}))
            return false;
        return true;
    }
};

}  // namespace

bool is_good(const MosaicSpace &sp, const Mosaic &m, const std::vector<Mosaic> &set) {
    const Neighborhood &nb = sp.nbhs[m.nbh];
    for (size_t j = 0; j < nb.S.size(); ++j) {
        bool found = false;
        for (const Mosaic &n : set) {
            const Neighborhood &o = sp.nbhs[n.nbh];
            if (o.has_pred && o.tminus == nb.t && o.rho == nb.S[j].first && o.t == nb.S[j].second &&
                n.ell[1] == m.ell[2 + j] && n.ell[0] == m.ell[1])
                found = true;
        }
        if (!found) return false;
    }
    if (nb.has_pred) {
        for (const Mosaic &n : set) {
            const Neighborhood &o = sp.nbhs[n.nbh];
            if (o.t != nb.tminus || n.ell[1] != m.ell[0]) continue;
            for (size_t j = 0; j < o.S.size(); ++j)
                if (o.S[j].first == nb.rho && o.S[j].second == nb.t && n.ell[2 + j] == m.ell[1]) return true;
        }
        return false;
    }
    return true;
}

std::vector<Mosaic> eliminate(const MosaicSpace &sp, std::vector<Mosaic> ms, size_t *rounds) {
    size_t r = 0;
    while (true) {
        GoodIndex gi(sp, ms);
        std::vector<Mosaic> next;
        for (const Mosaic &m : ms)
            if (gi.good(sp, m)) next.push_back(m);
        if (next.size() == ms.size()) break;
        ms = std::move(next);
        ++r;
    }
    if (rounds) *rounds = r;
    return ms;
}

FinHomResult decide_fin_hom(const TypeGraph &tg1, const TypeGraph &tg2, const Signature &sig, size_t cap) {
    FinHomResult res;
    MosaicSpace sp = make_space(tg1, tg2, sig);
    std::vector<Mosaic> m0 = enumerate_mosaics(sp, res.stats, cap);
    std::vector<Mosaic> mp = eliminate(sp, std::move(m0), &res.stats.rounds);
    res.stats.surviving = mp.size();
    for (const Mosaic &m : mp)
        if (m.ell[1] & 1u) res.holds = true;
    return res;
}

FinHomResult decide_fin_hom(const Reasoner &R1, const SymSet &t1, const Reasoner &R2, const SymSet &t2,
                            const Signature &sig, size_t cap) {
    return decide_fin_hom(type_graph(R1, t1), type_graph(R2, t2), sig, cap);
}

std::set<SymSet> compute_RQ(const Reasoner &R2, const SymSet &t, const Signature &q) {
    TypeGraph g = type_graph(R2, t);
    std::set<SymSet> out;
    for (const auto &n : g.nodes)
        if (!n.root && sig_part(n.rho, q).empty()) out.insert(n.type);
    return out;
}

std::string mosaics_json(const MosaicSpace &sp, const std::vector<Mosaic> &ms) {
    auto label = [&](uint64_t mask) {
        nlohmann::ordered_json a = nlohmann::ordered_json::array();
        for (size_t i = 0; i < sp.universe.size(); ++i)
            if ((mask >> i) & 1u) {
                const auto &node = sp.tg2.nodes[sp.universe[i]];
                a.push_back({{"type", names_str(node.type)},
                             {"via", node.root ? std::string("root") : roles_str(node.rho)}});
            }
        return a;
    };
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const Mosaic &m : ms) {
        const Neighborhood &nb = sp.nbhs[m.nbh];
        nlohmann::ordered_json e;
        e["neighborhood"] = nbh_str(nb);
        e["pred"] = label(m.ell[0]);
        e["center"] = label(m.ell[1]);
        nlohmann::ordered_json succ = nlohmann::ordered_json::array();
        for (size_t k = 0; k < nb.S.size(); ++k) succ.push_back(label(m.ell[2 + k]));
        e["succ"] = succ;
        j.push_back(e);
    }
    return j.dump(2);
}

}  // namespace hornce
