#include "support.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <sys/wait.h>

#include "asmlens/ingest.hpp"
#include "asmlens/x86_decoder.hpp"

namespace testsupport {

std::string fixture(const std::string& name) { return std::string(ASMLENS_FIXTURE_BIN_DIR) + "/" + name; }
std::string fixture_source_dir() { return ASMLENS_FIXTURE_SRC_DIR; }
std::string golden_dir() { return ASMLENS_GOLDEN_DIR; }
std::string cli_path() { return ASMLENS_CLI; }

ModelPtr load_fixture(const std::string& name) {
    static std::mutex mu;
    static std::map<std::string, ModelPtr> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[name];
    if (!slot) slot = ingest::load_binary(fixture(name), {fixture_source_dir()});
    return slot;
}

std::shared_ptr<ProgramModel> model_from_bytes(const std::vector<std::uint8_t>& bytes, Address base,
                                               const std::string& name,
                                               const std::vector<VariableLocation>& variables) {
    auto m = std::make_shared<ProgramModel>();
    m->binary_path = "<bytes>";
    m->instructions = x86::sweep(bytes, base);
    FunctionRecord f;
    f.function_id = FunctionId{0};
    f.name = name;
    f.entry_address = base;
    f.address_ranges = {{base, base + bytes.size()}};
    m->functions.push_back(f);
    m->variables = variables;
    ingest::assemble(*m);
    return m;
}

int run(const std::string& command, std::string* out) {
    FILE* p = popen(command.c_str(), "r");
    if (!p) return -1;
    std::array<char, 4096> buf{};
    std::string text;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) text.append(buf.data(), n);
    int status = pclose(p);
    if (out) *out = std::move(text);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool have_tool(const std::string& name) { return run("command -v " + name + " >/dev/null 2>&1") == 0; }

// ---------------------------------------------------------------------------

layout::FunctionView SynthFunction::view() const {
    layout::FunctionView v;
    v.function_id = forest.function_id;
    for (std::size_t p = 0; p < address_order.size(); ++p) {
        v.blocks.push_back(BlockId{static_cast<std::uint32_t>(p)});
        v.falls_through.push_back(p + 1 < address_order.size() && ideal[address_order[p]].falls_through);
    }
    v.forest = &forest;
    return v;
}

void SynthFunction::finish() {
    const std::size_t n = ideal.size();
    if (address_order.empty()) {
        address_order.resize(n);
        for (std::size_t i = 0; i < n; ++i) address_order[i] = i;
    }
    id_of.assign(n, BlockId{});
    for (std::size_t p = 0; p < n; ++p) id_of[address_order[p]] = BlockId{static_cast<std::uint32_t>(p)};

    struct Info {
        std::set<BlockId> members;
        std::optional<BlockId> header;
        std::vector<BlockId> latches;
        std::optional<int> parent;
        int depth = 1;
    };
    std::map<int, Info> info;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& b = ideal[i];
        for (std::size_t d = 0; d < b.loops.size(); ++d) {
            auto& li = info[b.loops[d]];
            li.members.insert(id_of[i]);
            li.depth = static_cast<int>(d) + 1;
            if (d > 0) li.parent = b.loops[d - 1];
        }
        if (b.loops.empty()) continue;
        auto& inner = info[b.loops.back()];
        if (b.header) inner.header = id_of[i];
        if (b.latch) inner.latches.push_back(id_of[i]);
    }

    // Pre-order, siblings by header id.
    std::map<std::optional<int>, std::vector<int>> kids;
    for (auto& [k, li] : info) {
        if (!li.header) throw std::logic_error("synthetic loop without header");
        kids[li.parent].push_back(k);
    }
    for (auto& [p, v] : kids)
        std::sort(v.begin(), v.end(), [&](int a, int b) { return *info[a].header < *info[b].header; });

    forest = LoopForest{};
    forest.function_id = FunctionId{0};
    std::function<void(std::optional<int>, std::optional<std::size_t>, const std::string&)> walk =
        [&](std::optional<int> parent_key, std::optional<std::size_t> parent_index, const std::string& prefix) {
            int ordinal = 0;
            for (int k : kids[parent_key]) {
                auto& li = info[k];
                Loop l;
                l.label = prefix + std::to_string(++ordinal);
                l.loop_id = name + ":" + l.label;
                l.header_block = *li.header;
                for (auto s : li.latches) l.back_edges.push_back({s, *li.header});
                std::sort(l.back_edges.begin(), l.back_edges.end());
                l.member_blocks = li.members;
                int ord = 0;
                for (auto b : li.members) l.member_index[b] = ++ord;
                l.parent = parent_index;
                l.depth = li.depth;
                std::size_t idx = forest.loops.size();
                forest.loops.push_back(std::move(l));
                if (parent_index) forest.loops[*parent_index].children.push_back(idx);
                else forest.roots.push_back(idx);
                walk(k, idx, forest.loops[idx].label + ".");
            }
        };
    walk(std::nullopt, std::nullopt, "L");
}

SynthFunction random_nest(std::mt19937& rng, int max_depth, int max_blocks) {
    SynthFunction f;
    int next_key = 0;
    auto coin = [&](double p) { return std::uniform_real_distribution<>(0, 1)(rng) < p; };
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<>(lo, hi)(rng); };

    // Emits a group of items into f.ideal; `path` is the enclosing loop chain.
    std::function<void(std::vector<int>, int)> group = [&](std::vector<int> path, int depth) {
        const bool is_loop = !path.empty();
        int direct = is_loop ? pick(1, 3) : pick(1, 4);
        int child_loops = 0;
        if (depth < max_depth && static_cast<int>(f.ideal.size()) < max_blocks) child_loops = pick(0, is_loop ? 2 : 3);
        std::vector<int> items;  // -1 = direct block, otherwise child ordinal
        for (int i = 0; i < direct; ++i) items.push_back(-1);
        for (int i = 0; i < child_loops; ++i) items.push_back(i);
        std::shuffle(items.begin(), items.end(), rng);

        std::vector<std::size_t> mine;
        for (int it : items) {
            if (it < 0) {
                SynthBlock b;
                b.loops = path;
                mine.push_back(f.ideal.size());
                f.ideal.push_back(b);
            } else {
                auto child = path;
                child.push_back(next_key++);
                group(child, depth + 1);
            }
        }
        if (is_loop) {
            f.ideal[mine[static_cast<std::size_t>(pick(0, static_cast<int>(mine.size()) - 1))]].header = true;
            int latches = pick(1, std::min<int>(2, static_cast<int>(mine.size())));
            std::vector<std::size_t> order = mine;
            std::shuffle(order.begin(), order.end(), rng);
            for (int i = 0; i < latches; ++i) f.ideal[order[static_cast<std::size_t>(i)]].latch = true;
        }
    };
    group({}, 0);
    for (auto& b : f.ideal) b.falls_through = !coin(0.25);
    f.finish();
    return f;
}

void perturb(SynthFunction& f, std::mt19937& rng, int moves) {
    auto& order = f.address_order;
    if (order.size() < 3) return;
    for (int m = 0; m < moves; ++m) {
        std::size_t from = std::uniform_int_distribution<std::size_t>(0, order.size() - 1)(rng);
        std::size_t to = std::uniform_int_distribution<std::size_t>(0, order.size() - 1)(rng);
        auto v = order[from];
        order.erase(order.begin() + static_cast<std::ptrdiff_t>(from));
        order.insert(order.begin() + static_cast<std::ptrdiff_t>(to), v);
    }
    f.finish();
}

// Interleaved nest: an outer loop whose inner loop's latch sits after the
// function's tail blocks.
SynthFunction interleaved_nest() {
    SynthFunction f;
    f.name = "nest";
    f.ideal = {
        {{}, false, false, true},       // gray
        {{1}, true, false, true},       // outer header
        {{1}, false, false, true},      // outer body
        {{1, 2}, true, false, true},    // inner header
        {{1, 2}, false, true, false},   // inner latch
        {{1}, false, true, true},       // outer latch
        {{}, false, false, true},       // gray
        {{}, false, false, false},      // gray, returns
    };
    f.address_order = {0, 1, 2, 3, 5, 6, 7, 4};
    f.finish();
    return f;
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing " + path);
    return nlohmann::json::parse(in);
}


SynthFunction quintuple_with_moved_block() {
    SynthFunction f;
    f.name = "quint";
    auto add = [&](std::vector<int> loops, bool header, bool latch) { f.ideal.push_back({loops, header, latch, true}); };
    add({}, false, false);
    add({1}, true, false);
    add({1, 2}, true, false);
    add({1, 2, 3}, true, false);
    add({1, 2, 3}, false, false);  // ideal index 4: displaced
    add({1, 2, 3, 4}, true, false);
    add({1, 2, 3, 4, 5}, true, false);
    for (int i = 0; i < 4; ++i) add({1, 2, 3, 4, 5}, false, false);
    add({1, 2, 3, 4, 5}, false, true);
    add({1, 2, 3, 4}, false, true);
    add({1, 2, 3}, false, true);
    add({1, 2}, false, true);
    add({1}, false, true);
    for (int i = 0; i < 10; ++i) add({}, false, false);
    for (std::size_t i = 0; i < f.ideal.size(); ++i)
        if (i != 4) f.address_order.push_back(i);
    f.address_order.push_back(4);
    f.finish();
    return f;
}

nlohmann::json plan_structure(const layout::LayoutPlan& plan) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : plan.rows) {
        rows.push_back({{"kind", layout::to_string(r.kind)},
                        {"block", to_string(r.block_id)},
                        {"indent", r.indent},
                        {"dashed", r.dashed_border},
                        {"spacing", layout::to_string(r.spacing_before)},
                        {"fall_through_arrow", r.fall_through_arrow_after}});
    }
    nlohmann::json arcs = nlohmann::json::array();
    for (const auto& a : plan.arcs) {
        arcs.push_back({{"from", a.from_row}, {"to", a.to_row}, {"lane", a.lane}, {"loop", a.loop_id}});
    }
    return {{"mode", layout::to_string(plan.ordering_mode)}, {"rows", rows}, {"arcs", arcs}};
}

bool arcs_properly_nested(const std::vector<layout::BackEdgeArc>& arcs, std::string* why) {
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        for (std::size_t j = 0; j < arcs.size(); ++j) {
            auto a = std::minmax(arcs[i].from_row, arcs[i].to_row);
            auto b = std::minmax(arcs[j].from_row, arcs[j].to_row);
            if (a.first < b.first && b.first < a.second && a.second < b.second) {
                if (why)
                    *why = arcs[i].loop_id + " [" + std::to_string(a.first) + "," + std::to_string(a.second) +
                           "] crosses " + arcs[j].loop_id + " [" + std::to_string(b.first) + "," +
                           std::to_string(b.second) + "]";
                return false;
            }
        }
    }
    return true;
}

}  // namespace testsupport
