#include "hornce/models.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>

#include "json.hpp"

namespace hornce {

int Interpretation::add(Elem e) {
    elems.push_back(std::move(e));
    return static_cast<int>(elems.size()) - 1;
}

int Interpretation::find(const std::string &name) const {
    for (size_t i = 0; i < elems.size(); ++i)
        if (elems[i].name == name) return static_cast<int>(i);
    return -1;
}

void Interpretation::add_role(int x, Role r, int y) {
    if (is_inv(r)) edges.insert({y, role_name(r), x});
    else edges.insert({x, role_name(r), y});
}

std::vector<int> Interpretation::individuals() const {
    std::vector<int> out;
    for (size_t i = 0; i < elems.size(); ++i)
        if (elems[i].individual) out.push_back(static_cast<int>(i));
    return out;
}

std::string Interpretation::to_abox() const {
    std::vector<std::string> lines;
    for (const Elem &e : elems) {
        std::vector<std::string> cs;
        for (Sym c : e.concepts) cs.push_back(sym_name(c));
        std::sort(cs.begin(), cs.end());
        for (auto &c : cs) lines.push_back(c + "(" + e.name + ")");
    }
    for (auto [x, r, y] : edges) lines.push_back(sym_name(r) + "(" + elems[x].name + "," + elems[y].name + ")");
    std::string out;
    for (auto &l : lines) out += l + "\n";
    return out;
}

std::string Interpretation::to_json() const {
    nlohmann::ordered_json j;
    j["elements"] = nlohmann::ordered_json::array();
    for (const Elem &e : elems) {
        std::vector<std::string> cs;
        for (Sym c : e.concepts) cs.push_back(sym_name(c));
        std::sort(cs.begin(), cs.end());
        nlohmann::ordered_json je;
        je["name"] = e.name;
        je["individual"] = e.individual;
        je["concepts"] = cs;
        if (!e.path.empty()) je["path"] = e.path;
        j["elements"].push_back(je);
    }
    j["edges"] = nlohmann::ordered_json::array();
    for (auto [x, r, y] : edges) j["edges"].push_back({elems[x].name, sym_name(r), elems[y].name});
    return j.dump(2);
}

Interpretation interpretation_of(const ABox &a) {
    Interpretation I;
    std::map<Sym, int> idx;
    for (Sym i : a.individuals()) idx[i] = I.add({sym_name(i), true, {}, sym_name(i), 0});
    for (const auto &c : a.concepts) set_insert(I.elems[idx[c.ind]].concepts, c.cname);
    for (const auto &r : a.roles) I.edges.insert({idx[r.a], r.role, idx[r.b]});
    return I;
}

std::vector<std::vector<int>> TypeGraph::parents() const {
    std::vector<std::vector<int>> out(nodes.size());
    for (size_t n = 0; n < kids.size(); ++n)
        for (auto &[rho, c] : kids[n])
            if (std::find(out[c].begin(), out[c].end(), static_cast<int>(n)) == out[c].end())
                out[c].push_back(static_cast<int>(n));
    return out;
}

std::string TypeGraph::to_string() const {
    std::string out;
    for (size_t n = 0; n < nodes.size(); ++n) {
        out += std::to_string(n) + ": " + names_str(nodes[n].type) + " via " +
               (nodes[n].root ? std::string("root") : roles_str(nodes[n].rho)) + " ->";
        for (auto &[rho, c] : kids[n]) out += " " + std::to_string(c);
        out += "\n";
    }
    return out;
}

namespace {

std::string succ_label(const Succ &s) { return roles_str(s.rho) + names_str(s.type); }

}  // namespace

Interpretation materialize(const Reasoner &R, const ABox &a, size_t depth) {
    ChaseResult ch = R.chase(a);
    if (!ch.consistent) throw InconsistentABox();
    Interpretation I;
    std::map<Sym, int> idx;
    for (auto &[i, ty] : ch.tp) idx[i] = I.add({sym_name(i), true, ty, sym_name(i), 0});
    for (auto [x, r, y] : ch.edges)
        if (!is_inv(r)) I.edges.insert({idx[x], role_name(r), idx[y]});
    std::deque<std::pair<int, std::vector<Succ>>> queue;
    for (auto &[i, ty] : ch.tp) queue.push_back({idx[i], R.abox_children(ch, i)});
    while (!queue.empty()) {
        auto [parent, kids] = queue.front();
        queue.pop_front();
        if (static_cast<size_t>(I.elems[parent].depth) >= depth) continue;
        for (size_t k = 0; k < kids.size(); ++k) {
            const Succ &s = kids[k];
            std::string pname = I.elems[parent].name;
            std::string name = (I.elems[parent].individual ? "_" + pname : pname) + "_" + std::to_string(k);
            int c = I.add({name, false, s.type, I.elems[parent].path + " " + succ_label(s), I.elems[parent].depth + 1});
            for (Role r : s.rho) I.add_role(parent, r, c);
            queue.push_back({c, R.children(s.type, s.rho)});
        }
    }
    return I;
}

TypeGraph type_graph(const Reasoner &R, const SymSet &t0) {
    TypeGraph g;
    std::map<std::tuple<bool, SymSet, RoleSet>, int> idx;
    g.nodes.push_back({t0, {}, true});
    g.kids.emplace_back();
    idx[{true, t0, {}}] = 0;
    for (size_t n = 0; n < g.nodes.size(); ++n) {
        TypeGraph::Node node = g.nodes[n];
        for (const Succ &s : R.children(node.type, node.root ? RoleSet{} : node.rho)) {
            auto key = std::make_tuple(false, s.type, s.rho);
            auto it = idx.find(key);
            int c;
            if (it == idx.end()) {
                c = static_cast<int>(g.nodes.size());
                idx[key] = c;
                g.nodes.push_back({s.type, s.rho, false});
                g.kids.emplace_back();
            } else {
                c = it->second;
            }
            g.kids[n].push_back({s.rho, c});
        }
    }
    return g;
}

Interpretation unfold(const TypeGraph &g, size_t depth) {
    Interpretation I;
    I.add({"root", false, g.nodes[g.root].type, "", 0});
    std::vector<int> node_of = {g.root};
    for (size_t e = 0; e < I.elems.size(); ++e) {
        if (static_cast<size_t>(I.elems[e].depth) >= depth) continue;
        int n = node_of[e];
        for (size_t k = 0; k < g.kids[n].size(); ++k) {
            auto &[rho, c] = g.kids[n][k];
            int child = I.add({I.elems[e].name + "_" + std::to_string(k), false, g.nodes[c].type,
                               I.elems[e].path + " " + roles_str(rho) + names_str(g.nodes[c].type),
                               I.elems[e].depth + 1});
            node_of.push_back(c);
            for (Role r : rho) I.add_role(static_cast<int>(e), r, child);
        }
    }
    return I;
}

TypeGraph con_part(const TypeGraph &g, const Signature &s) {
    TypeGraph out;
    std::vector<int> map(g.size(), -1);
    std::vector<int> order = {g.root};
    map[g.root] = 0;
    out.nodes.push_back(g.nodes[g.root]);
    out.kids.emplace_back();
    for (size_t k = 0; k < order.size(); ++k)
        for (auto &[rho, c] : g.kids[order[k]]) {
            bool keep = false;
            for (Role r : rho) keep = keep || s.has_role_any(r);
            if (!keep) continue;
            if (map[c] < 0) {
                map[c] = static_cast<int>(out.nodes.size());
                out.nodes.push_back(g.nodes[c]);
                out.kids.emplace_back();
                order.push_back(c);
            }
            out.kids[k].push_back({rho, map[c]});
        }
    return out;
}

Interpretation restrict_con(const Interpretation &I, const Signature &s) {
    std::vector<char> keep(I.elems.size(), 0);
    std::vector<int> stack = I.individuals();
    for (int i : stack) keep[i] = 1;
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (auto [a, r, b] : I.edges) {
            if (!s.has_role(r)) continue;
            int y = a == x ? b : b == x ? a : -1;
            if (y >= 0 && !keep[y]) {
                keep[y] = 1;
                stack.push_back(y);
            }
        }
    }
    Interpretation out;
    std::vector<int> map(I.elems.size(), -1);
    for (size_t i = 0; i < I.elems.size(); ++i)
        if (keep[i]) map[i] = out.add(I.elems[i]);
    for (auto [a, r, b] : I.edges)
        if (keep[a] && keep[b]) out.edges.insert({map[a], r, map[b]});
    return out;
}

ABox unravel(const ABox &a, Sym ind, size_t depth) {
    std::map<Sym, std::vector<std::pair<Role, Sym>>> adj;
    for (const auto &r : a.roles) {
        adj[r.a].push_back({mk_role(r.role), r.b});
        adj[r.b].push_back({inv(mk_role(r.role)), r.a});
    }
    for (auto &[k, v] : adj) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    std::map<Sym, std::vector<Sym>> concepts;
    for (const auto &c : a.concepts) concepts[c.ind].push_back(c.cname);

    struct Item {
        Sym seq;
        Sym last;
        Sym prev;
        Role via;
        size_t d;
    };
    ABox out;
    std::deque<Item> queue = {{ind, ind, -1, -1, 0}};
    while (!queue.empty()) {
        Item it = queue.front();
        queue.pop_front();
        for (Sym c : concepts[it.last]) out.concepts.push_back({c, it.seq});
        if (it.d >= depth) continue;
        for (auto [r, b] : adj[it.last]) {
            if (it.prev >= 0 && b == it.prev && r == inv(it.via)) continue;
            std::string rn = (is_inv(r) ? "inv" : "") + sym_name(role_name(r));
            Sym seq = intern(sym_name(it.seq) + "_" + rn + "_" + sym_name(b));
            if (is_inv(r)) out.roles.push_back({role_name(r), seq, it.seq});
            else out.roles.push_back({role_name(r), it.seq, seq});
            queue.push_back({seq, b, it.last, r, it.d + 1});
        }
    }
    return out;
}

namespace {

struct SrcView {
    int n = 0;
    std::vector<SymSet> labels;
    // Required roles from u to v, for S-adjacent u != v.
    std::vector<std::map<int, RoleSet>> adj;
    bool self_loop = false;
};

SrcView view(const Interpretation &src, const Signature &s) {
    SrcView v;
    v.n = static_cast<int>(src.elems.size());
    v.adj.resize(v.n);
    for (int i = 0; i < v.n; ++i) v.labels.push_back(set_inter(src.elems[i].concepts, s.concepts));
    for (auto [x, r, y] : src.edges) {
        if (!s.has_role(r)) continue;
        if (x == y) {
            v.self_loop = true;
            continue;
        }
        set_insert(v.adj[x][y], mk_role(r));
        set_insert(v.adj[y][x], inv(mk_role(r)));
    }
    return v;
}

class HomSearch {
public:
    HomSearch(const SrcView &v, const TypeGraph &g) : v_(v), g_(g) {}

    bool fits(int u, int node) const { return set_subset(v_.labels[u], g_.nodes[node].type); }

    bool tree_dp(int u, int p, std::vector<int> &path) {
        auto key = std::make_tuple(u, p, path);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        bool ok = fits(u, path.back());
        for (auto it2 = v_.adj[u].begin(); ok && it2 != v_.adj[u].end(); ++it2) {
            int w = it2->first;
            if (w == p) continue;
            const RoleSet &need = it2->second;
            bool found = false;
            for (auto &[rho, c] : g_.kids[path.back()]) {
                if (!set_subset(need, rho)) continue;
                path.push_back(c);
                found = tree_dp(w, u, path);
                path.pop_back();
                if (found) break;
            }
            if (!found && path.size() >= 2) {
                const RoleSet &rho = g_.nodes[path.back()].rho;
                bool fit = true;
                for (Role r : need)
                    if (!set_has(rho, inv(r))) fit = false;
                if (fit) {
                    int last = path.back();
                    path.pop_back();
                    found = tree_dp(w, u, path);
                    path.push_back(last);
                }
            }
            if (!found) ok = false;
        }
        memo_[key] = ok;
        return ok;
    }

    // Generic backtracking for components with cycles.
    bool backtrack(const std::vector<int> &order, size_t i, std::map<int, std::vector<int>> &asg) {
        if (i == order.size()) return true;
        int u = order[i];
        std::vector<std::vector<int>> cands;
        int anchor = -1;
        for (auto &[w, need] : v_.adj[u])
            if (asg.count(w)) {
                anchor = w;
                break;
            }
        const std::vector<int> &pw = asg.at(anchor);
        for (auto &[rho, c] : g_.kids[pw.back()]) {
            std::vector<int> p = pw;
            p.push_back(c);
            cands.push_back(p);
        }
        if (pw.size() >= 2) cands.push_back(std::vector<int>(pw.begin(), pw.end() - 1));
        for (auto &cand : cands) {
            if (!fits(u, cand.back())) continue;
            bool ok = true;
            for (auto &[w, need] : v_.adj[u]) {
                if (!asg.count(w)) continue;
                const std::vector<int> &q = asg[w];
                if (cand.size() == q.size() + 1 && std::equal(q.begin(), q.end(), cand.begin())) {
                    const RoleSet &rho = g_.nodes[cand.back()].rho;
                    for (Role r : need)
                        if (!set_has(rho, inv(r))) ok = false;
                } else if (q.size() == cand.size() + 1 && std::equal(cand.begin(), cand.end(), q.begin())) {
                    const RoleSet &rho = g_.nodes[q.back()].rho;
                    for (Role r : need)
                        if (!set_has(rho, r)) ok = false;
                } else {
                    ok = false;
                }
                if (!ok) break;
            }
            if (!ok) continue;
            asg[u] = cand;
            if (backtrack(order, i + 1, asg)) return true;
            asg.erase(u);
        }
        return false;
    }

private:
    const SrcView &v_;
    const TypeGraph &g_;
    std::map<std::tuple<int, int, std::vector<int>>, bool> memo_;
};

}  // namespace

bool hom_into_regular(const Interpretation &src, const TypeGraph &tgt, const Signature &s,
                      std::optional<std::pair<int, int>> anchor) {
    SrcView v = view(src, s);
    if (v.self_loop) return false;
    std::vector<int> comp(v.n, -1);
    int nc = 0;
    for (int i = 0; i < v.n; ++i) {
        if (comp[i] >= 0) continue;
        std::vector<int> st = {i};
        comp[i] = nc;
        while (!st.empty()) {
            int u = st.back();
            st.pop_back();
            for (auto &[w, need] : v.adj[u])
                if (comp[w] < 0) {
                    comp[w] = nc;
                    st.push_back(w);
                }
        }
        ++nc;
    }
    HomSearch hs(v, tgt);
    for (int c = 0; c < nc; ++c) {
        std::vector<int> members;
        size_t edges = 0;
        for (int i = 0; i < v.n; ++i)
            if (comp[i] == c) {
                members.push_back(i);
                edges += v.adj[i].size();
            }
        bool tree = edges / 2 + 1 == members.size();
        std::vector<std::pair<int, int>> starts;
        if (anchor && comp[anchor->first] == c) {
            starts.push_back(*anchor);
        } else {
            for (int u : members)
                for (size_t n = 0; n < tgt.nodes.size(); ++n) starts.push_back({u, static_cast<int>(n)});
        }
        bool ok = false;
        for (auto [u, n] : starts) {
            std::vector<int> path = {n};
            if (tree) {
                ok = hs.tree_dp(u, -1, path);
            } else {
                if (!hs.fits(u, n)) continue;
                std::vector<int> order = {u};
                std::vector<char> seen(v.n, 0);
                seen[u] = 1;
                for (size_t k = 0; k < order.size(); ++k)
                    for (auto &[w, need] : v.adj[order[k]])
                        if (!seen[w]) {
                            seen[w] = 1;
                            order.push_back(w);
                        }
                std::map<int, std::vector<int>> asg;
                asg[u] = path;
                ok = hs.backtrack(order, 1, asg);
            }
            if (ok) break;
        }
        if (!ok) return false;
    }
    return true;
}

LGraph as_lgraph(const Interpretation &I) {
    LGraph g;
    for (const auto &e : I.elems) g.labels.push_back(e.concepts);
    g.out.resize(I.elems.size());
    for (auto [x, r, y] : I.edges) {
        g.out[x].push_back({mk_role(r), y});
        g.out[y].push_back({inv(mk_role(r)), x});
    }
    return g;
}

LGraph as_lgraph(const TypeGraph &tg) {
    LGraph g;
    for (const auto &n : tg.nodes) g.labels.push_back(n.type);
    g.out.resize(tg.nodes.size());
    for (size_t n = 0; n < tg.kids.size(); ++n)
        for (auto &[rho, c] : tg.kids[n])
            for (Role r : rho) {
                g.out[n].push_back({r, c});
                g.out[c].push_back({inv(r), static_cast<int>(n)});
            }
    return g;
}

std::set<std::pair<int, int>> max_simulation(const LGraph &src, const LGraph &tgt, const Signature &s) {
    size_t n = src.labels.size(), m = tgt.labels.size();
    std::vector<std::vector<char>> rel(n, std::vector<char>(m, 0));
    for (size_t d = 0; d < n; ++d) {
        SymSet need = set_inter(src.labels[d], s.concepts);
        for (size_t e = 0; e < m; ++e) rel[d][e] = set_subset(need, tgt.labels[e]);
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t d = 0; d < n; ++d)
            for (size_t e = 0; e < m; ++e) {
                if (!rel[d][e]) continue;
                for (auto [r, d2] : src.out[d]) {
                    if (!s.has_role_any(r)) continue;
                    bool ok = false;
                    for (auto [r2, e2] : tgt.out[e])
                        if (r2 == r && rel[d2][e2]) {
                            ok = true;
                            break;
                        }
                    if (!ok) {
                        rel[d][e] = 0;
                        changed = true;
                        break;
                    }
                }
            }
    }
    std::set<std::pair<int, int>> out;
    for (size_t d = 0; d < n; ++d)
        for (size_t e = 0; e < m; ++e)
            if (rel[d][e]) out.insert({static_cast<int>(d), static_cast<int>(e)});
    return out;
}

bool is_simulation(const LGraph &src, const LGraph &tgt, const Signature &s,
                   const std::set<std::pair<int, int>> &rel) {
    for (auto [d, e] : rel) {
        if (!set_subset(set_inter(src.labels[d], s.concepts), tgt.labels[e])) return false;
        for (auto [r, d2] : src.out[d]) {
            if (!s.has_role_any(r)) continue;
            bool ok = false;
            for (auto [r2, e2] : tgt.out[e])
                if (r2 == r && rel.count({d2, e2})) ok = true;
            if (!ok) return false;
        }
    }
    return true;
}

bool sim_check(const LGraph &src, const LGraph &tgt, const Signature &s,
               const std::set<std::pair<int, int>> &anchors) {
    auto rel = max_simulation(src, tgt, s);
    for (auto &p : anchors)
        if (!rel.count(p)) return false;
    return true;
}

bool n_bounded_hom_oracle(const TypeGraph &src, const TypeGraph &tgt, const Signature &s, size_t n) {
    if (n == 0) return true;
    auto s_edge = [&](const RoleSet &rho) {
        for (Role r : rho)
            if (s.has_role_any(r)) return true;
        return false;
    };
    struct Piece {
        int node;
        int parent;
        RoleSet rho;
    };
    std::set<std::string> checked;
    bool all_ok = true;
    std::function<void(std::vector<Piece> &, std::vector<std::pair<int, size_t>>)> grow;
    grow = [&](std::vector<Piece> &cur, std::vector<std::pair<int, size_t>> cands) {
        if (!all_ok) return;
        Interpretation I;
        std::string key;
        for (size_t i = 0; i < cur.size(); ++i) {
            I.add({"e" + std::to_string(i), false, set_inter(src.nodes[cur[i].node].type, s.concepts)});
            key += std::to_string(cur[i].node) + "/" + std::to_string(cur[i].parent) + ";";
            if (cur[i].parent >= 0)
                for (Role r : cur[i].rho)
                    if (s.has_role_any(r)) I.add_role(cur[i].parent, r, static_cast<int>(i));
        }
        if (checked.insert(key).second && !hom_into_regular(I, tgt, s)) {
            all_ok = false;
            return;
        }
        if (cur.size() >= n) return;
        for (size_t k = 0; k < cands.size(); ++k) {
            auto [pi, ki] = cands[k];
            auto &[rho, c] = src.kids[cur[pi].node][ki];
            cur.push_back({c, pi, rho});
            std::vector<std::pair<int, size_t>> next(cands.begin() + static_cast<long>(k) + 1, cands.end());
            int me = static_cast<int>(cur.size()) - 1;
            for (size_t j = 0; j < src.kids[c].size(); ++j)
                if (s_edge(src.kids[c][j].first)) next.push_back({me, j});
            grow(cur, next);
            cur.pop_back();
            if (!all_ok) return;
        }
    };
    for (size_t nd = 0; nd < src.nodes.size() && all_ok; ++nd) {
        std::vector<Piece> cur = {{static_cast<int>(nd), -1, {}}};
        std::vector<std::pair<int, size_t>> cands;
        for (size_t j = 0; j < src.kids[nd].size(); ++j)
            if (s_edge(src.kids[nd][j].first)) cands.push_back({0, j});
        grow(cur, cands);
    }
    return all_ok;
}

}  // namespace hornce
