#include "ddflow/report.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

namespace ddflow {

namespace {

std::string method_name(const Cpg& cpg, const CpgNode& n) {
  if (n.methodId == 0 || !cpg.contains(n.methodId)) return "";
  return cpg.node(n.methodId).fullName;
}

}  // namespace

std::string report_json(const Cpg& cpg, const FlowReport& report, bool timing) {
  nlohmann::ordered_json flows = nlohmann::ordered_json::array();
  for (const auto& flow : report.flows) {
    nlohmann::ordered_json elements = nlohmann::ordered_json::array();
    for (NodeId id : flow.nodes) {
      const auto& n = cpg.node(id);
      elements.push_back({{"id", id}, {"code", n.code}, {"line", n.lineNumber}, {"method", method_name(cpg, n)}});
    }
    flows.push_back({{"source", flow.source()}, {"sink", flow.sink()}, {"elements", std::move(elements)}});
  }
  nlohmann::ordered_json doc;
  doc["version"] = kReportVersion;
  doc["flows"] = std::move(flows);
  doc["stats"] = {{"tasks", report.stats.tasks}, {"elapsedMs", timing ? report.stats.elapsedMs : 0.0}};
  return doc.dump(2) + "\n";
}

std::string report_text(const Cpg& cpg, const FlowReport& report, bool timing) {
  std::ostringstream out;
  out << report.flows.size() << (report.flows.size() == 1 ? " flow" : " flows") << '\n';
  int index = 0;
  for (const auto& flow : report.flows) {
    out << "\nflow " << ++index << ": " << cpg.node(flow.source()).code << " -> " << cpg.node(flow.sink()).code
        << '\n';
    for (NodeId id : flow.nodes) {
      const auto& n = cpg.node(id);
      out << "  [" << id << "] " << method_name(cpg, n) << ':' << n.lineNumber << "  " << n.code << '\n';
    }
  }
  out << "\ntasks: " << report.stats.tasks;
  if (timing) out << ", elapsed: " << report.stats.elapsedMs << " ms";
  out << '\n';
  return out.str();
}

}  // namespace ddflow
