#include "ddflow/engine.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>
#include <variant>

namespace ddflow {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Use:
      return "use";
    case Role::Output:
      return "output";
    case Role::Value:
      return "value";
    case Role::Param:
      return "param";
  }
  return "?";
}

ResultTable::Entry ResultTable::find(const Key& key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : it->second;
}

ResultTable::Entry ResultTable::insert(const Key& key, Entry value) {
  std::unique_lock lock(mutex_);
  return entries_.try_emplace(key, std::move(value)).first->second;
}

std::size_t ResultTable::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

QueryContext::QueryContext(const Cpg& cpg, const TaintQuery& query)
    : cpg_(cpg), query_(query), semantics_(cpg, query.registry) {
  for (const auto& n : cpg.nodes()) {
    if (n.kind == NodeKind::Method) methods_[n.id];
  }
  for (const auto& n : cpg.nodes()) {
    auto it = methods_.find(n.methodId);
    if (it == methods_.end() || n.id == n.methodId) continue;
    auto& info = it->second;
    if (n.kind == NodeKind::MethodReturn) info.methodReturn = n.id;
    if (n.kind == NodeKind::ParameterOut) info.parameterOut[n.argumentIndex] = n.id;
    if (n.kind == NodeKind::Return) info.returns.push_back(n.id);
  }
  for (auto& [m, info] : methods_) {
    std::set<NodeId> sites(cpg.in_neighbors(m, EdgeKind::CALL).begin(), cpg.in_neighbors(m, EdgeKind::CALL).end());
    for (NodeId ref : cpg.in_neighbors(m, EdgeKind::REF)) {
      auto call = call_of_argument(cpg, ref);
      if (call && cpg.node(ref).argumentIndex == kReceiverIndex) sites.insert(*call);
    }
    info.callSites.assign(sites.begin(), sites.end());
  }
}

Role QueryContext::input_role(NodeId n) const {
  return cpg_.node(n).kind == NodeKind::Call ? Role::Value : Role::Use;
}

Role QueryContext::def_role(NodeId n) const {
  const auto kind = cpg_.node(n).kind;
  if (kind == NodeKind::ParameterIn) return Role::Param;
  if (kind == NodeKind::Call) return Role::Value;
  if (call_of_argument(cpg_, n)) return Role::Output;
  return Role::Use;
}

Role QueryContext::sink_role(NodeId n) const {
  const auto kind = cpg_.node(n).kind;
  if (kind == NodeKind::ParameterIn) return Role::Param;
  if (kind == NodeKind::Call) return Role::Value;
  return Role::Use;
}

std::optional<NodeId> QueryContext::internal_callee(NodeId call) const {
  for (NodeId callee : cpg_.out_neighbors(call, EdgeKind::CALL))
    if (cpg_.node(callee).kind == NodeKind::Method) return callee;
  return std::nullopt;
}

std::optional<NodeId> QueryContext::referenced_method(NodeId n) const {
  for (NodeId target : cpg_.out_neighbors(n, EdgeKind::REF))
    if (methods_.contains(target)) return target;
  return std::nullopt;
}

bool QueryContext::targets(NodeId call, NodeId method) const {
  if (cpg_.has_edge(call, method, EdgeKind::CALL)) return true;
  for (NodeId a : cpg_.out_neighbors(call, EdgeKind::ARGUMENT))
    if (cpg_.node(a).argumentIndex == kReceiverIndex && cpg_.has_edge(a, method, EdgeKind::REF)) return true;
  return false;
}

bool QueryContext::defers(NodeId n, Role role) const {
  if (role == Role::Param) return false;
  if (referenced_method(n)) return true;
  if (role == Role::Value) {
    auto callee = internal_callee(n);
    return callee && methods_.at(*callee).methodReturn != 0;
  }
  if (role == Role::Output) {
    auto call = call_of_argument(cpg_, n);
    if (!call) return false;
    auto callee = internal_callee(*call);
    return callee && methods_.at(*callee).parameterOut.contains(cpg_.node(n).argumentIndex);
  }
  return false;
}

std::vector<std::pair<NodeId, Role>> QueryContext::parents(NodeId n, Role role) const {
  std::vector<std::pair<NodeId, Role>> out;
  auto add = [&](NodeId p, Role r) {
    std::pair<NodeId, Role> entry{p, r};
    if (std::find(out.begin(), out.end(), entry) == out.end()) out.push_back(entry);
  };
  switch (role) {
    case Role::Param:
      return out;
    case Role::Use:
    case Role::Value:
      for (NodeId p : cpg_.in_neighbors(n, EdgeKind::DDG))
        add(p, call_of_argument(cpg_, p) == n ? input_role(p) : def_role(p));
      return out;
    case Role::Output: {
      auto call = call_of_argument(cpg_, n);
      if (call)
        for (NodeId sibling : cpg_.out_neighbors(*call, EdgeKind::ARGUMENT))
          if (sibling != n) add(sibling, input_role(sibling));
      for (NodeId p : cpg_.in_neighbors(n, EdgeKind::DDG)) add(p, def_role(p));
      // Base of an index/field assignment target also receives the assigned value.
      if (call && cpg_.node(n).argumentIndex == 1) {
        if (auto assign = call_of_argument(cpg_, *call))
          for (NodeId a : cpg_.out_neighbors(*assign, EdgeKind::ARGUMENT))
            if (cpg_.node(a).argumentIndex == 2 && edge_exists(cpg_, n, a)) add(a, input_role(a));
      }
      return out;
    }
  }
  return out;
}

std::vector<ResultTable::Segment> QueryContext::walk(NodeId start, Role role, bool canDefer,
                                                     const std::vector<PathElement>& blocked) const {
  struct Frame {
    NodeId node;
    Role role;
    bool resolved;
    std::vector<std::pair<NodeId, Role>> parents;
    std::size_t next = 0;
  };
  std::set<NodeId> blockedNodes;
  for (const auto& e : blocked) blockedNodes.insert(e.node);
  std::set<NodeId> onPath;
  std::vector<Frame> stack;
  std::vector<ResultTable::Segment> out;

  auto emit = [&](ResultKind kind, bool headResolved) {
    ResultTable::Segment seg;
    seg.kind = kind;
    seg.headRole = stack.back().role;
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) seg.elements.push_back({it->node, it->resolved});
    seg.elements.front().resolved = headResolved;
    out.push_back(std::move(seg));
  };
  auto enter = [&](NodeId n, Role r, bool resolved) {
    stack.push_back(Frame{n, r, resolved, {}, 0});
    onPath.insert(n);
    if (query_.sources.contains(n)) emit(ResultKind::Complete, resolved);
    if (r == Role::Param) {
      emit(ResultKind::Partial, resolved);
    } else if (canDefer && defers(n, r)) {
      emit(ResultKind::Partial, false);
    } else {
      stack.back().parents = parents(n, r);
    }
  };

  enter(start, role, true);
  while (!stack.empty()) {
    auto& top = stack.back();
    if (top.next == top.parents.size()) {
      onPath.erase(top.node);
      stack.pop_back();
      continue;
    }
    auto [p, pRole] = top.parents[top.next++];
    if (onPath.contains(p) || blockedNodes.contains(p)) continue;
    EdgeValidity v = is_valid_edge(cpg_, semantics_, top.node, p);
    if (v == EdgeValidity::Invalid) continue;
    enter(p, pRole, !(v == EdgeValidity::ValidUnresolved || pRole == Role::Output));
  }
  return out;
}

std::vector<TaintResult> QueryContext::solve_task(const Task& task) {
  for (const auto& e : task.path)
    if (e.node == task.start) return {};
  const bool canDefer = task.depth + 1 < query_.maxCallDepth;
  const ResultTable::Key key{task.start, task.role, canDefer};
  auto entry = table_.find(key);
  if (!entry)
    entry = table_.insert(
        key, std::make_shared<const std::vector<ResultTable::Segment>>(walk(task.start, task.role, canDefer, {})));

  std::set<NodeId> suffix;
  for (const auto& e : task.path) suffix.insert(e.node);
  std::vector<TaintResult> results;
  for (const auto& seg : *entry) {
    if (std::any_of(seg.elements.begin(), seg.elements.end(),
                    [&](const PathElement& e) { return suffix.contains(e.node); }))
      continue;
    TaintResult r;
    r.path = seg.elements;
    r.path.insert(r.path.end(), task.path.begin(), task.path.end());
    r.depth = task.depth;
    r.kind = seg.kind;
    r.headRole = seg.headRole;
    r.callStack = task.callStack;
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<TaintResult> QueryContext::compute_results_for_parents(NodeId s, Role role,
                                                                   const std::vector<PathElement>& p,
                                                                   int depth) const {
  const bool canDefer = depth + 1 < query_.maxCallDepth;
  std::vector<TaintResult> results;
  for (auto& seg : walk(s, role, canDefer, p)) {
    if (seg.elements.size() < 2) continue;  // emitted at s itself
    TaintResult r;
    r.path = std::move(seg.elements);
    r.path.insert(r.path.end(), p.begin(), p.end());
    r.depth = depth;
    r.kind = seg.kind;
    r.headRole = seg.headRole;
    results.push_back(std::move(r));
  }
  return deduplicate(std::move(results));
}

std::vector<Task> QueryContext::create_tasks_from_result(const TaintResult& result) const {
  std::vector<Task> tasks;
  if (result.kind != ResultKind::Partial || result.path.empty()) return tasks;
  const PathElement head = result.path.front();
  const auto& node = cpg_.node(head.node);
  const int k = result.depth;
  auto argument = [&](NodeId call, int index) -> std::optional<NodeId> {
    for (NodeId a : cpg_.out_neighbors(call, EdgeKind::ARGUMENT))
      if (cpg_.node(a).argumentIndex == index) return a;
    return std::nullopt;
  };

  if (result.headRole == Role::Param) {
    if (!methods_.contains(node.methodId)) return tasks;
    // Returning to the call site we descended through keeps the walk
    // context-sensitive; this step undoes a descent, so no depth check.
    if (!result.callStack.empty() && targets(result.callStack.back(), node.methodId)) {
      if (auto arg = argument(result.callStack.back(), node.argumentIndex)) {
        auto stack = result.callStack;
        stack.pop_back();
        tasks.push_back(Task{*arg, input_role(*arg), result.path, k - 1, std::move(stack)});
      }
      return tasks;
    }
    if (k + 1 >= query_.maxCallDepth) return tasks;
    for (NodeId call : methods_.at(node.methodId).callSites)
      if (auto arg = argument(call, node.argumentIndex))
        tasks.push_back(Task{*arg, input_role(*arg), result.path, k + 1, {}});
    return tasks;
  }

  if (head.resolved || k + 1 >= query_.maxCallDepth) return tasks;
  if (auto ref = referenced_method(head.node)) {
    for (NodeId ret : methods_.at(*ref).returns)
      tasks.push_back(Task{ret, Role::Use, result.path, k + 1, result.callStack});
    return tasks;
  }
  if (result.headRole == Role::Value) {
    if (auto callee = internal_callee(head.node)) {
      auto stack = result.callStack;
      stack.push_back(head.node);
      tasks.push_back(Task{methods_.at(*callee).methodReturn, Role::Use, result.path, k + 1, std::move(stack)});
    }
  } else if (result.headRole == Role::Output) {
    auto call = call_of_argument(cpg_, head.node);
    auto callee = call ? internal_callee(*call) : std::nullopt;
    if (callee) {
      const auto& outs = methods_.at(*callee).parameterOut;
      if (auto it = outs.find(node.argumentIndex); it != outs.end()) {
        auto stack = result.callStack;
        stack.push_back(*call);
        tasks.push_back(Task{it->second, Role::Use, result.path, k + 1, std::move(stack)});
      }
    }
  }
  return tasks;
}

std::vector<TaintResult> deduplicate(std::vector<TaintResult> results) {
  auto key = [](const TaintResult& r) {
    std::vector<NodeId> nodes;
    for (const auto& e : r.path) nodes.push_back(e.node);
    return std::make_pair(std::move(nodes), r.kind);
  };
  std::stable_sort(results.begin(), results.end(),
                   [&](const TaintResult& a, const TaintResult& b) { return key(a) < key(b); });
  std::vector<TaintResult> out;
  for (auto& r : results)
    if (out.empty() || key(out.back()) != key(r)) out.push_back(std::move(r));
  return out;
}

namespace {

using Output = std::variant<std::vector<TaintResult>, std::exception_ptr>;

class WorkerPool {
 public:
  WorkerPool(QueryContext& ctx, unsigned jobs) : ctx_(ctx) {
    for (unsigned i = 0; i < jobs; ++i) threads_.emplace_back([this] { work(); });
  }

  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    workCv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  /// Queues a task unless an identical one was seen before.
  void submit(Task task) {
    {
      std::lock_guard lock(mutex_);
      if (!seen_.insert(task).second) return;
      work_.push_back(std::move(task));
      ++inflight_;
    }
    workCv_.notify_one();
  }

  /// Next batch of results, or nullopt once every queued task has been
  /// consumed and nothing is running.
  std::optional<Output> next() {
    std::unique_lock lock(mutex_);
    doneCv_.wait(lock, [&] { return !outputs_.empty() || inflight_ == 0; });
    if (outputs_.empty()) return std::nullopt;
    Output out = std::move(outputs_.front());
    outputs_.pop_front();
    --inflight_;
    return out;
  }

  std::size_t task_count() const {
    std::lock_guard lock(mutex_);
    return seen_.size();
  }

 private:
  void work() {
    for (;;) {
      Task task;
      {
        std::unique_lock lock(mutex_);
        workCv_.wait(lock, [&] { return stop_ || !work_.empty(); });
        if (stop_) return;
        task = std::move(work_.front());
        work_.pop_front();
      }
      Output out;
      try {
        out = ctx_.solve_task(task);
      } catch (...) {
        out = std::current_exception();
      }
      {
        std::lock_guard lock(mutex_);
        outputs_.push_back(std::move(out));
      }
      doneCv_.notify_one();
    }
  }

  QueryContext& ctx_;
  mutable std::mutex mutex_;
  std::condition_variable workCv_;
  std::condition_variable doneCv_;
  std::deque<Task> work_;
  std::deque<Output> outputs_;
  std::set<Task> seen_;
  std::size_t inflight_ = 0;
  bool stop_ = false;
  std::vector<std::thread> threads_;
};

}  // namespace

FlowReport run_query(const Cpg& cpg, const TaintQuery& query) {
  if (query.maxCallDepth < 1) throw QueryError("maximum call depth must be at least 1");
  for (const auto* set : {&query.sources, &query.sinks})
    for (NodeId n : *set)
      if (!cpg.contains(n)) throw QueryError("query references unknown node " + std::to_string(n));

  const auto started = std::chrono::steady_clock::now();
  FlowReport report;
  QueryContext ctx(cpg, query);
  std::set<std::vector<NodeId>> complete;
  {
    unsigned jobs = query.jobs ? query.jobs : std::max(1u, std::thread::hardware_concurrency());
    WorkerPool pool(ctx, jobs);
    for (NodeId sink : query.sinks) pool.submit(Task{sink, ctx.sink_role(sink), {}, 0, {}});
    while (auto out = pool.next()) {
      if (auto* error = std::get_if<std::exception_ptr>(&*out)) std::rethrow_exception(*error);
      for (const auto& r : std::get<std::vector<TaintResult>>(*out)) {
        if (r.kind == ResultKind::Complete) {
          std::vector<NodeId> nodes;
          for (const auto& e : r.path) nodes.push_back(e.node);
          complete.insert(std::move(nodes));
          continue;
        }
        for (auto& t : ctx.create_tasks_from_result(r)) pool.submit(std::move(t));
      }
    }
    report.stats.tasks = pool.task_count();
  }
  for (const auto& nodes : complete) report.flows.push_back(Flow{nodes});
  std::sort(report.flows.begin(), report.flows.end(), [](const Flow& a, const Flow& b) {
    auto ka = std::make_tuple(a.sink(), a.source(), a.nodes.size());
    auto kb = std::make_tuple(b.sink(), b.source(), b.nodes.size());
    return ka != kb ? ka < kb : a.nodes < b.nodes;
  });
  report.stats.elapsedMs =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace ddflow
