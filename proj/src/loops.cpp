#include "asmlens/loops.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>

namespace asmlens::loops {

std::vector<int> compute_dominators(const Graph& g) {
    const int n = g.size();
    std::vector<int> idom(n, -1);
    if (n == 0) return idom;

    // Reverse postorder from the entry (iterative DFS).
    std::vector<int> post;
    std::vector<char> seen(n, 0);
    std::vector<std::pair<int, std::size_t>> stack{{g.entry, 0}};
    seen[g.entry] = 1;
    while (!stack.empty()) {
        auto& [v, i] = stack.back();
        if (i < g.succ[v].size()) {
            int w = g.succ[v][i++];
            if (!seen[w]) {
                seen[w] = 1;
                stack.emplace_back(w, 0);
            }
        } else {
            post.push_back(v);
            stack.pop_back();
        }
    }
    std::vector<int> order(n, -1);  // postorder number
    for (std::size_t i = 0; i < post.size(); ++i) order[post[i]] = static_cast<int>(i);
    std::vector<std::vector<int>> preds(n);
    for (int v = 0; v < n; ++v)
        for (int w : g.succ[v]) preds[w].push_back(v);

    auto intersect = [&](int a, int b) {
        while (a != b) {
            while (order[a] < order[b]) a = idom[a];
            while (order[b] < order[a]) b = idom[b];
        }
        return a;
    };
    idom[g.entry] = g.entry;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = post.rbegin(); it != post.rend(); ++it) {
            int v = *it;
            if (v == g.entry) continue;
            int new_idom = -1;
            for (int p : preds[v]) {
                if (idom[p] == -1) continue;
                new_idom = new_idom == -1 ? p : intersect(p, new_idom);
            }
            if (new_idom != idom[v]) {
                idom[v] = new_idom;
                changed = true;
            }
        }
    }
    return idom;
}

bool dominates(const std::vector<int>& idom, int a, int b) {
    if (idom[b] == -1 || idom[a] == -1) return false;
    for (;;) {
        if (a == b) return true;
        if (idom[b] == b) return false;
        b = idom[b];
    }
}

std::vector<std::pair<int, int>> find_back_edges(const Graph& g, const std::vector<int>& idom) {
    std::vector<std::pair<int, int>> out;
    for (int u = 0; u < g.size(); ++u)
        for (int v : g.succ[u])
            if (dominates(idom, v, u)) out.emplace_back(u, v);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<int> natural_loop(const Graph& g, int source, int header) {
    std::vector<std::vector<int>> preds(g.size());
    for (int v = 0; v < g.size(); ++v)
        for (int w : g.succ[v]) preds[w].push_back(v);
    std::vector<char> in(g.size(), 0);
    in[header] = 1;
    std::vector<int> work;
    if (!in[source]) {
        in[source] = 1;
        work.push_back(source);
    }
    while (!work.empty()) {
        int v = work.back();
        work.pop_back();
        for (int p : preds[v])
            if (!in[p]) {
                in[p] = 1;
                work.push_back(p);
            }
    }
    std::vector<int> members;
    for (int v = 0; v < g.size(); ++v)
        if (in[v]) members.push_back(v);
    return members;
}

std::vector<NaturalLoop> build_loop_forest(const Graph& g, const std::vector<int>& idom,
                                           std::vector<std::string>& diagnostics) {
    auto back = find_back_edges(g, idom);

    // Irreducibility: the reachable graph without back edges must be acyclic.
    {
        const int n = g.size();
        std::vector<int> indegree(n, 0);
        int reachable = 0;
        for (int v = 0; v < n; ++v) {
            if (idom[v] == -1) continue;
            ++reachable;
            for (int w : g.succ[v])
                if (!std::binary_search(back.begin(), back.end(), std::make_pair(v, w))) ++indegree[w];
        }
        std::vector<int> ready;
        for (int v = 0; v < n; ++v)
            if (idom[v] != -1 && indegree[v] == 0) ready.push_back(v);
        int done = 0;
        while (!ready.empty()) {
            int v = ready.back();
            ready.pop_back();
            ++done;
            for (int w : g.succ[v])
                if (!std::binary_search(back.begin(), back.end(), std::make_pair(v, w)) && --indegree[w] == 0)
                    ready.push_back(w);
        }
        if (done < reachable) diagnostics.push_back("irreducible control flow: cycle without a back edge");
    }

    std::map<int, NaturalLoop> by_header;
    for (auto [u, v] : back) {
        auto& loop = by_header[v];
        loop.header = v;
        loop.back_edges.emplace_back(u, v);
        auto members = natural_loop(g, u, v);
        std::erase_if(members, [&](int m) { return idom[m] == -1; });
        std::vector<int> merged;
        std::set_union(loop.members.begin(), loop.members.end(), members.begin(), members.end(),
                       std::back_inserter(merged));
        loop.members = std::move(merged);
    }
    std::vector<NaturalLoop> flat;
    for (auto& [h, l] : by_header) flat.push_back(std::move(l));

    // Parent = smallest strict superset.
    auto contains = [](const NaturalLoop& outer, const NaturalLoop& inner) {
        return std::includes(outer.members.begin(), outer.members.end(), inner.members.begin(), inner.members.end());
    };
    std::vector<int> parent(flat.size(), -1);
    for (std::size_t i = 0; i < flat.size(); ++i) {
        for (std::size_t j = 0; j < flat.size(); ++j) {
            if (i == j || flat[j].members.size() <= flat[i].members.size() || !contains(flat[j], flat[i])) continue;
            if (parent[i] == -1 || flat[j].members.size() < flat[parent[i]].members.size()) parent[i] = static_cast<int>(j);
        }
    }

    // Pre-order with labels; `flat` is already sorted by header.
    std::vector<NaturalLoop> out;
    std::function<void(int, int, const std::string&)> emit = [&](int idx, int out_parent, const std::string& label) {
        NaturalLoop l = flat[idx];
        l.label = label;
        l.parent = out_parent;
        l.depth = out_parent < 0 ? 1 : out[out_parent].depth + 1;
        l.children.clear();
        int me = static_cast<int>(out.size());
        out.push_back(std::move(l));
        if (out_parent >= 0) out[out_parent].children.push_back(me);
        int k = 0;
        for (std::size_t c = 0; c < flat.size(); ++c)
            if (parent[c] == idx) emit(static_cast<int>(c), me, label + "." + std::to_string(++k));
    };
    int k = 0;
    for (std::size_t i = 0; i < flat.size(); ++i)
        if (parent[i] == -1) emit(static_cast<int>(i), -1, "L" + std::to_string(++k));
    return out;
}

LoopForest analyze_function(const FunctionRecord& function, const std::vector<BasicBlock>& all_blocks,
                            const std::vector<BlockId>& blocks, const std::vector<ControlFlowEdge>& edges) {
    LoopForest forest;
    forest.function_id = function.function_id;
    if (blocks.empty()) return forest;
    std::unordered_map<std::uint32_t, int> local;
    for (std::size_t i = 0; i < blocks.size(); ++i) local[blocks[i].value] = static_cast<int>(i);

    Graph g;
    g.succ.resize(blocks.size());
    g.entry = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i)
        if (all_blocks[blocks[i].value].start_address == function.entry_address) g.entry = static_cast<int>(i);
    for (const auto& e : edges) {
        if (e.kind == EdgeKind::Call || e.kind == EdgeKind::CallReturn) continue;
        auto s = local.find(e.source.value);
        auto t = local.find(e.target.value);
        if (s == local.end() || t == local.end()) continue;
        auto& out = g.succ[s->second];
        if (std::find(out.begin(), out.end(), t->second) == out.end()) out.push_back(t->second);
    }
    auto idom = compute_dominators(g);
    auto natural = build_loop_forest(g, idom, forest.diagnostics);
    for (const auto& n : natural) {
        Loop l;
        l.label = n.label;
        l.loop_id = function.name + ":" + n.label;
        l.header_block = blocks[n.header];
        for (auto [u, v] : n.back_edges) l.back_edges.push_back({blocks[u], blocks[v]});
        int ord = 0;
        for (int m : n.members) {
            l.member_blocks.insert(blocks[m]);
            l.member_index[blocks[m]] = ++ord;
        }
        if (n.parent >= 0) l.parent = static_cast<std::size_t>(n.parent);
        for (int c : n.children) l.children.push_back(static_cast<std::size_t>(c));
        l.depth = n.depth;
        forest.loops.push_back(std::move(l));
        if (n.parent < 0) forest.roots.push_back(forest.loops.size() - 1);
    }
    return forest;
}

}  // namespace asmlens::loops
