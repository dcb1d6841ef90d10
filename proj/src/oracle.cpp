#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>

#include "hornce/entailment.hpp"

namespace hornce {

namespace {

struct Bits {
    std::vector<uint64_t> w;
    explicit Bits(size_t n = 0) : w((n + 63) / 64, 0) {}
    void set(size_t i) { w[i / 64] |= uint64_t{1} << (i % 64); }
    bool test(size_t i) const { return (w[i / 64] >> (i % 64)) & 1u; }
    bool any() const {
        return std::any_of(w.begin(), w.end(), [](uint64_t x) { return x != 0; });
    }
    Bits operator&(const Bits &o) const {
        Bits r = *this;
        for (size_t i = 0; i < w.size(); ++i) r.w[i] &= o.w[i];
        return r;
    }
    bool operator<(const Bits &o) const { return w < o.w; }
};

// Finite part of a universal model: the ABox individuals first, anonymous trees below them and copies of
// every reachable anonymous element, each unfolded to a fixed depth.
struct FiniteModel {
    size_t inds = 0;
    std::vector<SymSet> type;
    std::vector<std::vector<std::pair<int, RoleSet>>> adj;

    int add(const SymSet &t) {
        type.push_back(t);
        adj.emplace_back();
        return static_cast<int>(type.size()) - 1;
    }
    void link(int x, int y, Role r) {
        for (auto &[z, rs] : adj[static_cast<size_t>(x)])
            if (z == y) {
                set_insert(rs, r);
                return;
            }
        adj[static_cast<size_t>(x)].push_back({y, RoleSet{r}});
    }
    size_t size() const { return type.size(); }
};

FiniteModel build_model(const Reasoner &R, const ABox &a, const std::vector<Sym> &inds, size_t depth) {
    ChaseResult ch = R.chase(a);
    FiniteModel m;
    std::map<Sym, int> idx;
    for (Sym i : inds) idx[i] = m.add(ch.tp.at(i));
    m.inds = inds.size();
    for (auto [x, r, y] : ch.edges) {
        m.link(idx.at(x), idx.at(y), r);
        m.link(idx.at(y), idx.at(x), inv(r));
    }
    std::function<void(int, const std::vector<Succ> &, size_t)> grow = [&](int e, const std::vector<Succ> &cs,
                                                                            size_t d) {
        if (d >= depth) return;
        for (const Succ &s : cs) {
            int k = m.add(s.type);
            for (Role r : s.rho) {
                m.link(e, k, r);
                m.link(k, e, inv(r));
            }
            grow(k, R.children(s.type, s.rho), d + 1);
        }
    };
    std::set<Succ> reach;
    std::vector<Succ> stack;
    for (Sym i : inds) {
        std::vector<Succ> cs = R.abox_children(ch, i);
        grow(idx.at(i), cs, 0);
        for (const Succ &s : cs)
            if (reach.insert(s).second) stack.push_back(s);
    }
    while (!stack.empty()) {
        Succ s = stack.back();
        stack.pop_back();
        for (const Succ &c : R.children(s.type, s.rho))
            if (reach.insert(c).second) stack.push_back(c);
    }
    for (const Succ &s : reach) {
        int root = m.add(s.type);
        grow(root, R.children(s.type, s.rho), 0);
    }
    return m;
}

// Tree query: concept label at the root and children reached through sets of directed roles.
struct QNode {
    SymSet label;
    std::vector<std::pair<RoleSet, std::shared_ptr<const QNode>>> kids;
};
using QPtr = std::shared_ptr<const QNode>;

CQ to_cq(const QPtr &q, bool boolean) {
    CQ out;
    int next = 0;
    auto var = [&]() {
        static const char *names[] = {"x", "y", "z", "u", "v", "w"};
        int i = next++;
        return intern(i < 6 ? std::string(names[i]) : "x" + std::to_string(i));
    };
    std::function<void(const QPtr &, Sym)> go = [&](const QPtr &n, Sym v) {
        for (Sym c : n->label) out.atoms.push_back({false, c, v, -1});
        for (auto &[rs, k] : n->kids) {
            Sym w = var();
            for (Role r : rs) {
                if (is_inv(r)) out.atoms.push_back({true, role_name(r), w, v});
                else out.atoms.push_back({true, role_name(r), v, w});
            }
            go(k, w);
        }
    };
    Sym root = var();
    go(q, root);
    if (!boolean) out.answer = {root};
    return out;
}

struct QEntry {
    Bits s2, s1;
    size_t size;
    QPtr q;
};

std::vector<SymSet> subsets(const SymSet &xs) {
    std::vector<SymSet> out;
    for (uint32_t mask = 0; mask < (1u << xs.size()); ++mask) {
        SymSet s;
        for (size_t i = 0; i < xs.size(); ++i)
            if ((mask >> i) & 1u) s.push_back(xs[i]);
        out.push_back(s);
    }
    std::stable_sort(out.begin(), out.end(), [](const SymSet &x, const SymSet &y) { return x.size() < y.size(); });
    return out;
}

Bits extent(const FiniteModel &m, const SymSet &label) {
    Bits b(m.size());
    for (size_t e = 0; e < m.size(); ++e)
        if (set_subset(label, m.type[e])) b.set(e);
    return b;
}

Bits pre(const FiniteModel &m, const RoleSet &rs, const Bits &c) {
    Bits b(m.size());
    for (size_t e = 0; e < m.size(); ++e)
        for (auto &[k, have] : m.adj[e])
            if (c.test(static_cast<size_t>(k)) && set_subset(rs, have)) {
                b.set(e);
                break;
            }
    return b;
}

// First query (smallest size, then generation order) separating the two models, as (query, answer index or -1).
std::optional<std::pair<CQ, int>> separate(const FiniteModel &m2, const FiniteModel &m1, const Signature &sq,
                                           size_t max_vars, bool one_tree) {
    std::vector<SymSet> labels = subsets(sq.concepts);
    std::vector<RoleSet> edges;
    if (one_tree) {
        for (Sym r : sq.roles) edges.push_back({mk_role(r)});
    } else {
        RoleSet dirs;
        for (Sym r : sq.roles) {
            dirs.push_back(mk_role(r));
            dirs.push_back(mk_role(r, true));
        }
        for (SymSet s : subsets(dirs))
            if (!s.empty()) edges.push_back(s);
    }

    std::set<std::pair<Bits, Bits>> seen;
    std::vector<std::vector<QEntry>> by_size(max_vars + 1);
    std::optional<std::pair<CQ, int>> found;
    auto offer = [&](QEntry e) {
        if (!e.s2.any() || !seen.insert({e.s2, e.s1}).second) return;
        for (size_t i = 0; i < m2.inds; ++i)
            if (e.s2.test(i) && !e.s1.test(i)) {
                found = std::make_pair(to_cq(e.q, false), static_cast<int>(i));
                return;
            }
        if (!one_tree && e.s2.any() && !e.s1.any()) {
            found = std::make_pair(to_cq(e.q, true), -1);
            return;
        }
        by_size[e.size].push_back(std::move(e));
    };

    for (const SymSet &l : labels) {
        offer({extent(m2, l), extent(m1, l), 1, std::make_shared<QNode>(QNode{l, {}})});
        if (found) return found;
    }
    for (size_t n = 2; n <= max_vars; ++n) {
        for (size_t a = 1; a < n; ++a) {
            size_t b = n - a;
            for (size_t i = 0; i < by_size[a].size(); ++i) {
                for (size_t j = 0; j < by_size[b].size(); ++j) {
                    const QEntry &child = by_size[b][j];
                    for (const RoleSet &rs : edges) {
                        const QEntry &base = by_size[a][i];
                        auto node = std::make_shared<QNode>(*base.q);
                        node->kids.push_back({rs, child.q});
                        offer({base.s2 & pre(m2, rs, child.s2), base.s1 & pre(m1, rs, child.s1), n, node});
                        if (found) return found;
                    }
                }
            }
        }
    }
    return std::nullopt;
}

}  // namespace

void enumerate_tree_aboxes(const Signature &sa, size_t max_ind,
                           const std::function<bool(const ABox &, const std::vector<Sym> &)> &f) {
    std::vector<SymSet> labels = subsets(sa.concepts);
    size_t nedge = 2 * sa.roles.size();
    std::vector<Sym> names;
    for (size_t i = 0; i < max_ind; ++i)
        names.push_back(intern(i < 26 ? std::string(1, static_cast<char>('a' + i)) : "i" + std::to_string(i)));

    for (size_t n = 1; n <= max_ind; ++n) {
        if (n > 1 && nedge == 0) break;
        std::vector<int> parent(n, -1);
        std::vector<size_t> lab(n, 0), edge(n, 0);
        bool stop = false;
        std::function<void(size_t)> place = [&](size_t i) {
            if (stop) return;
            if (i == n) {
                ABox a;
                for (size_t v = 0; v < n; ++v)
                    for (Sym c : labels[lab[v]]) a.concepts.push_back({c, names[v]});
                for (size_t v = 1; v < n; ++v) {
                    Sym r = sa.roles[edge[v] / 2];
                    Sym p = names[static_cast<size_t>(parent[v])];
                    if (edge[v] % 2 == 0) a.roles.push_back({r, p, names[v]});
                    else a.roles.push_back({r, names[v], p});
                }
                if (a.concepts.empty() && a.roles.empty()) return;
                stop = f(a, std::vector<Sym>(names.begin(), names.begin() + static_cast<long>(n)));
                return;
            }
            if (i == 0) {
                for (size_t l = 0; l < labels.size() && !stop; ++l) {
                    lab[0] = l;
                    place(1);
                }
                return;
            }
            int lo = parent[i - 1] < 0 ? 0 : parent[i - 1];
            for (int p = lo; p < static_cast<int>(i) && !stop; ++p) {
                parent[i] = p;
                for (size_t e = 0; e < nedge && !stop; ++e) {
                    edge[i] = e;
                    for (size_t l = 0; l < labels.size() && !stop; ++l) {
                        lab[i] = l;
                        if (parent[i - 1] == p && std::make_pair(edge[i - 1], lab[i - 1]) > std::make_pair(e, l))
                            continue;
                        place(i + 1);
                    }
                }
            }
        };
        place(0);
        if (stop) return;
    }
}

std::optional<Witness> oracle_witness_search(const Reasoner &R1, const Reasoner &R2, const Signature &sa,
                                             const Signature &sq, size_t max_ind, size_t max_vars,
                                             bool one_tree) {
    if (max_vars == 0) return std::nullopt;
    std::optional<Witness> out;
    enumerate_tree_aboxes(sa, max_ind, [&](const ABox &a, const std::vector<Sym> &inds) {
        if (!R1.abox_consistent(a) || !R2.abox_consistent(a)) return false;
        FiniteModel m2 = build_model(R2, a, inds, max_vars - 1);
        FiniteModel m1 = build_model(R1, a, inds, max_vars - 1);
        auto sep = separate(m2, m1, sq, max_vars, one_tree);
        if (!sep) return false;
        Witness w{a, sep->first, {}};
        if (sep->second >= 0) w.answer = {inds[static_cast<size_t>(sep->second)]};
        if (!replay(R1, R2, w)) throw std::logic_error("oracle witness does not replay: " + print_cq(w.query));
        out = w;
        return true;
    });
    return out;
}

}  // namespace hornce
