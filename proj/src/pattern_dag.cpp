#include "aft/pattern_dag.hpp"

#include <algorithm>

#include "aft/errors.hpp"
#include "aft/textio.hpp"

namespace aft::pattern {

std::string to_string(NodeKind kind) {
    switch (kind) {
    case NodeKind::plain: return "plain";
    case NodeKind::redoing_wrapper: return "redoing_wrapper";
    case NodeKind::primary_replica: return "primary_replica";
    case NodeKind::secondary_replica: return "secondary_replica";
    case NodeKind::voter: return "voter";
    case NodeKind::watchdog: return "watchdog";
    }
    return "?";
}

NodeKind node_kind_from(std::string_view name) {
    if (name == "plain") return NodeKind::plain;
    if (name == "redoing_wrapper") return NodeKind::redoing_wrapper;
    if (name == "primary_replica") return NodeKind::primary_replica;
    if (name == "secondary_replica") return NodeKind::secondary_replica;
    if (name == "voter") return NodeKind::voter;
    if (name == "watchdog") return NodeKind::watchdog;
    throw ParseError("unknown node kind '" + std::string(name) + "'");
}

DagSnapshot::DagSnapshot(std::vector<ComponentNode> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    std::set<std::string> ids;
    for (const ComponentNode& node : nodes_) {
        if (node.id.empty())
            throw ConfigError("node id must not be empty");
        if (!ids.insert(node.id).second)
            throw ConfigError("duplicate node id '" + node.id + "'");
        if (node.kind == NodeKind::redoing_wrapper && node.max_retries < 1)
            throw ConfigError("redoing wrapper '" + node.id + "' needs max_retries >= 1");
    }
    std::set<Edge> seen;
    for (const Edge& edge : edges_) {
        if (!ids.count(edge.from))
            throw ConfigError("edge from unknown node '" + edge.from + "'");
        if (!ids.count(edge.to))
            throw ConfigError("edge to unknown node '" + edge.to + "'");
        if (!seen.insert(edge).second)
            throw ConfigError("duplicate edge " + edge.from + " -> " + edge.to);
    }
    topological_order(); // rejects cycles
}

bool DagSnapshot::contains(const std::string& id) const {
    return std::any_of(nodes_.begin(), nodes_.end(),
                       [&](const ComponentNode& n) { return n.id == id; });
}

const ComponentNode& DagSnapshot::node(const std::string& id) const {
    for (const ComponentNode& n : nodes_)
        if (n.id == id)
            return n;
    throw ConfigError("unknown component '" + id + "'");
}

std::vector<std::string> DagSnapshot::topological_order() const {
    std::map<std::string, int> indegree;
    for (const ComponentNode& n : nodes_)
        indegree[n.id] = 0;
    for (const Edge& e : edges_)
        ++indegree[e.to];

    std::vector<std::string> order;
    std::set<std::string> placed;
    while (order.size() < nodes_.size()) {
        const ComponentNode* next = nullptr;
        for (const ComponentNode& n : nodes_) {
            if (!placed.count(n.id) && indegree[n.id] == 0) {
                next = &n;
                break;
            }
        }
        if (!next)
            throw ConfigError("component graph contains a cycle");
        order.push_back(next->id);
        placed.insert(next->id);
        for (const Edge& e : edges_)
            if (e.from == next->id)
                --indegree[e.to];
    }
    return order;
}

DagSnapshot inject(const DagSnapshot& current, const DagSnapshot& replacement,
                   const std::string& at) {
    if (!current.contains(at))
        throw ConfigError("unknown component '" + at + "'");
    for (const ComponentNode& node : replacement.nodes())
        if (node.id != at && current.contains(node.id))
            throw ConfigError("replacement node id '" + node.id + "' collides with the graph");

    // Entry/exit nodes of the replacement pattern, in declaration order.
    std::set<std::string> has_in, has_out;
    for (const Edge& e : replacement.edges()) {
        has_in.insert(e.to);
        has_out.insert(e.from);
    }
    std::vector<std::string> entries, exits;
    for (const ComponentNode& node : replacement.nodes()) {
        if (!has_in.count(node.id))
            entries.push_back(node.id);
        if (!has_out.count(node.id))
            exits.push_back(node.id);
    }

    std::vector<ComponentNode> nodes;
    for (const ComponentNode& node : current.nodes())
        if (node.id != at)
            nodes.push_back(node);
    for (const ComponentNode& node : replacement.nodes())
        nodes.push_back(node);

    std::vector<Edge> edges;
    for (const Edge& e : current.edges()) {
        if (e.from == at) {
            for (const std::string& exit : exits)
                edges.push_back({exit, e.to});
        } else if (e.to == at) {
            for (const std::string& entry : entries)
                edges.push_back({e.from, entry});
        } else {
            edges.push_back(e);
        }
    }
    for (const Edge& e : replacement.edges())
        edges.push_back(e);

    return DagSnapshot(std::move(nodes), std::move(edges));
}

DagSnapshot make_redoing_dag(const std::string& protected_id, int max_retries) {
    std::vector<ComponentNode> nodes = {
        {"c1", NodeKind::plain, 10},
        {"c2", NodeKind::plain, 10},
        {protected_id, NodeKind::redoing_wrapper, max_retries},
        {"c4", NodeKind::plain, 10},
        {"w", NodeKind::watchdog, 10},
    };
    std::vector<Edge> edges = {
        {"c1", protected_id},
        {"c2", protected_id},
        {protected_id, "c4"},
        {protected_id, "w"},
    };
    return DagSnapshot(std::move(nodes), std::move(edges));
}

DagSnapshot make_reconfiguration_subgraph(const std::string& base) {
    std::vector<ComponentNode> nodes = {
        {base + ".1", NodeKind::primary_replica, 10},
        {base + ".2", NodeKind::secondary_replica, 10},
    };
    return DagSnapshot(std::move(nodes), {});
}

std::vector<assumption::Assumption> environment_assumptions() {
    using assumption::Assumption;
    using assumption::BindingTime;
    using assumption::ValueLiteral;
    std::vector<Assumption> out;
    out.push_back({"e0", "protected component sees no faults", BindingTime::run,
                   ValueLiteral::text("none"), std::nullopt, std::nullopt});
    out.push_back({"e1", "protected component fails transiently at worst", BindingTime::run,
                   ValueLiteral::text("transient"), std::nullopt, std::nullopt});
    out.push_back({"e2", "protected component may fail permanently", BindingTime::run,
                   ValueLiteral::text("permanent"), std::nullopt, std::nullopt});
    return out;
}

std::string base_id(const std::string& id) {
    auto pos = id.rfind('.');
    if (pos == std::string::npos || pos == 0 || pos + 1 == id.size())
        return id;
    return id.substr(0, pos);
}

namespace {

bool fault_on(const std::vector<fault::ActiveFault>& faults, const std::string& target) {
    return std::any_of(faults.begin(), faults.end(),
                       [&](const fault::ActiveFault& f) { return f.target == target; });
}

bool permanent_on(const std::vector<fault::ActiveFault>& faults, const std::string& target) {
    return std::any_of(faults.begin(), faults.end(), [&](const fault::ActiveFault& f) {
        return f.target == target && f.cls == fault::FaultClass::permanent;
    });
}

} // namespace

StepOutcome execute_step(const DagSnapshot& dag, const std::vector<fault::ActiveFault>& faults,
                         AlphaStates& alpha, const alpha::AlphaConfig& config) {
    config.validate();
    StepOutcome outcome;

    for (const ComponentNode& node : dag.nodes()) {
        ChannelReport report;
        if (node.kind == NodeKind::redoing_wrapper) {
            report.channel = node.id;
            bool hit = fault_on(faults, node.id) || fault_on(faults, base_id(node.id));
            if (hit) {
                if (permanent_on(faults, node.id) || permanent_on(faults, base_id(node.id))) {
                    // Every redo re-executes against the same broken component.
                    report.failed_attempts = 1 + node.max_retries;
                    report.task_failure = true;
                } else {
                    report.failed_attempts = 1; // the redo succeeds
                }
            }
        } else if (node.kind == NodeKind::primary_replica) {
            report.channel = base_id(node.id);
            const ComponentNode* secondary = nullptr;
            for (const ComponentNode& other : dag.nodes())
                if (other.kind == NodeKind::secondary_replica &&
                    base_id(other.id) == report.channel)
                    secondary = &other;
            bool primary_hit = fault_on(faults, node.id) || fault_on(faults, report.channel);
            if (primary_hit) {
                report.failed_attempts = 1;
                // The standby shares no fate with the primary: it only fails
                // when the schedule targets it by its own id.
                if (secondary && !fault_on(faults, secondary->id)) {
                    report.takeover = true;
                } else {
                    if (secondary)
                        report.failed_attempts = 2;
                    report.task_failure = true;
                }
            }
        } else {
            continue;
        }

        report.watchdog_fired = report.failed_attempts > 0;
        alpha::AlphaCountState& state = alpha[report.channel];
        bool was_latched = state.latched;
        state = alpha::step(state, config, report.watchdog_fired);
        report.alpha_after = state.alpha;
        report.latched_after = state.latched;
        if (!was_latched && state.latched)
            outcome.switch_requests.push_back(report.channel);
        if (report.task_failure)
            outcome.success = false;
        outcome.channels.push_back(std::move(report));
    }
    return outcome;
}

SwitchResult assess_and_switch(const DagSnapshot& dag, std::set<std::string>& switched,
                               const std::string& channel, assumption::Registry* registry,
                               int64_t t) {
    if (switched.count(channel))
        return {dag, false};
    if (!dag.contains(channel) || dag.node(channel).kind != NodeKind::redoing_wrapper) {
        switched.insert(channel); // nothing left to replace; remember the no-op
        return {dag, false};
    }

    DagSnapshot next = inject(dag, make_reconfiguration_subgraph(channel), channel);
    switched.insert(channel);
    if (registry) {
        auto truth = assumption::ValueLiteral::text("permanent");
        if (registry->contains("e1"))
            registry->observe("e1", truth, t); // clash: the environment broke e1
        if (registry->contains("e2"))
            registry->observe("e2", truth, t); // e2 now matches the truth
    }
    return {next, true};
}

std::string serialize_dag(const DagSnapshot& dag) {
    std::string out;
    for (const ComponentNode& node : dag.nodes()) {
        out += node.id;
        out += ": ";
        out += to_string(node.kind);
        if (node.kind == NodeKind::redoing_wrapper) {
            out += " max_retries=";
            out += std::to_string(node.max_retries);
        }
        out += '\n';
    }
    for (const Edge& edge : dag.edges()) {
        out += edge.from;
        out += " -> ";
        out += edge.to;
        out += '\n';
    }
    return out;
}

DagSnapshot parse_dag(const std::string& text) {
    std::vector<ComponentNode> nodes;
    std::vector<Edge> edges;
    int line_no = 0;
    for (const std::string& raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        try {
            if (auto arrow = line.find("->"); arrow != std::string_view::npos) {
                std::string from(trim(line.substr(0, arrow)));
                std::string to(trim(line.substr(arrow + 2)));
                if (from.empty() || to.empty())
                    throw ParseError("edge needs both endpoints");
                edges.push_back({std::move(from), std::move(to)});
                continue;
            }
            auto colon = line.find(':');
            if (colon == std::string_view::npos)
                throw ParseError("expected 'id: kind' or 'from -> to'");
            ComponentNode node;
            node.id = std::string(trim(line.substr(0, colon)));
            std::vector<std::string> words;
            for (const std::string& w : split(trim(line.substr(colon + 1)), ' '))
                if (!trim(w).empty())
                    words.emplace_back(trim(w));
            if (words.empty())
                throw ParseError("node line is missing its kind");
            node.kind = node_kind_from(words[0]);
            for (std::size_t i = 1; i < words.size(); ++i) {
                if (words[i].starts_with("max_retries="))
                    node.max_retries =
                        static_cast<int>(parse_int(words[i].substr(12), "max_retries"));
                else
                    throw ParseError("unknown node annotation '" + words[i] + "'");
            }
            nodes.push_back(std::move(node));
        } catch (const Error& err) {
            throw ParseError(err.what(), line_no);
        }
    }
    return DagSnapshot(std::move(nodes), std::move(edges));
}

} // namespace aft::pattern
