#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "aft/alpha_count.hpp"
#include "aft/assumption.hpp"
#include "aft/fault_model.hpp"

namespace aft::pattern {

enum class NodeKind { plain, redoing_wrapper, primary_replica, secondary_replica, voter, watchdog };

std::string to_string(NodeKind kind);
NodeKind node_kind_from(std::string_view name);

struct ComponentNode {
    std::string id;
    NodeKind kind = NodeKind::plain;
    int max_retries = 10; // redoing_wrapper only: bound on redo attempts per step
};

struct Edge {
    std::string from;
    std::string to;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Immutable acyclic component graph; one snapshot per architectural pattern.
// The constructor validates id uniqueness, edge endpoints and acyclicity.
class DagSnapshot {
public:
    DagSnapshot() = default;
    DagSnapshot(std::vector<ComponentNode> nodes, std::vector<Edge> edges);

    const std::vector<ComponentNode>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }

    bool contains(const std::string& id) const;
    const ComponentNode& node(const std::string& id) const;

    // Kahn order; every node appears exactly once.
    std::vector<std::string> topological_order() const;

private:
    std::vector<ComponentNode> nodes_;
    std::vector<Edge> edges_;
};

// Grafts `replacement` into `current` in place of node `at`: edges into `at`
// are rewired to the replacement's entry nodes (no in-edge inside the
// replacement), edges out of `at` leave from its exit nodes. Rejects unknown
// ids, id collisions and results that would not stay acyclic.
DagSnapshot inject(const DagSnapshot& current, const DagSnapshot& replacement,
                   const std::string& at);

// The redoing pattern: a small pipeline whose protected component is wrapped
// in a retry-on-failure wrapper reporting to a watchdog.
//
//   c1 -> c3 <- c2, c3 -> c4, c3 -> w
DagSnapshot make_redoing_dag(const std::string& protected_id = "c3", int max_retries = 10);

// The reconfiguration pattern for one component: a primary version and a
// standby secondary, as parallel drop-in replacements (<base>.1, <base>.2).
DagSnapshot make_reconfiguration_subgraph(const std::string& base);

// Environment assumptions the pattern choice is bound to: e0 (no faults),
// e1 (transient faults, served by redoing), e2 (permanent faults, served by
// reconfiguration). e0 is registered for completeness but never selected.
std::vector<assumption::Assumption> environment_assumptions();

// The replica-version suffix is dropped when mapping nodes to fault targets
// and alpha channels: "c3.1" answers for component "c3".
std::string base_id(const std::string& id);

using AlphaStates = std::map<std::string, alpha::AlphaCountState>;

// What happened to one protected component during a step.
struct ChannelReport {
    std::string channel;
    int failed_attempts = 0;
    bool watchdog_fired = false; // at least one attempt failed this step
    bool task_failure = false;   // no attempt delivered a result
    bool takeover = false;       // secondary stood in for a failed primary
    double alpha_after = 0.0;
    bool latched_after = false;
};

struct StepOutcome {
    bool success = true; // every protected component delivered a result
    std::vector<ChannelReport> channels;
    std::vector<std::string> switch_requests; // channels whose alpha latched this step
};

// Runs one simulated step of every protected component under the active
// pattern. Redoing: a transient or intermittent fault costs one failed
// attempt before the redo succeeds; a permanent fault exhausts all
// 1 + max_retries attempts and the step is a task failure. Reconfiguration:
// a failed primary is taken over by the secondary within the same step.
// The watchdog fires once per step with at least one failed attempt and
// feeds that component's alpha channel.
StepOutcome execute_step(const DagSnapshot& dag, const std::vector<fault::ActiveFault>& faults,
                         AlphaStates& alpha, const alpha::AlphaConfig& config);

struct SwitchResult {
    DagSnapshot dag;
    bool switched = false; // false when the request was a no-op repeat
};

// Applies the redoing -> reconfiguration transition for a latched channel,
// at most once per component. When a registry is given, the e1 assumption is
// observed as "permanent" (logging the clash) and e2 is bound in its place.
SwitchResult assess_and_switch(const DagSnapshot& dag, std::set<std::string>& switched,
                               const std::string& channel,
                               assumption::Registry* registry = nullptr, int64_t t = 0);

// Edge-list text form: `id: kind` node lines (redoing wrappers annotated
// with max_retries=N), then `from -> to` edge lines. `#` starts a comment.
std::string serialize_dag(const DagSnapshot& dag);
DagSnapshot parse_dag(const std::string& text);

} // namespace aft::pattern
