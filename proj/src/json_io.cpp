#include "tollcast/json_io.hpp"

#include <fstream>

#include "tollcast/errors.hpp"

namespace tollcast {

Rational rational_from_json(const Json& value, const std::string& field) {
  if (value.is_number_integer()) {
    return Rational(static_cast<long>(value.get<long long>()));
  }
  if (value.is_string()) {
    auto r = Rational::parse(value.get<std::string>());
    if (r) return *r;
    throw ValidationError(field, "not a rational value: " + value.get<std::string>());
  }
  if (value.is_number_float()) {
    throw ValidationError(field, "floating-point literals are inexact; use a string");
  }
  throw ValidationError(field, "expected a rational string");
}

namespace {

const Json& require(const Json& doc, const char* key, const std::string& field) {
  auto it = doc.find(key);
  if (it == doc.end()) throw ValidationError(field + key, "missing");
  return *it;
}

}  // namespace

Instance instance_from_json(const Json& doc) {
  if (!doc.is_object()) throw ValidationError("", "instance document must be an object");

  std::vector<std::string> nodes;
  for (const auto& n : require(doc, "nodes", "")) {
    if (!n.is_string()) throw ValidationError("nodes", "node ids must be strings");
    nodes.push_back(n.get<std::string>());
  }
  std::vector<std::string> externalities;
  for (const auto& x : require(doc, "externalities", "")) {
    if (!x.is_string()) throw ValidationError("externalities", "class ids must be strings");
    externalities.push_back(x.get<std::string>());
  }

  auto node_index = [&](const Json& v, const std::string& field) {
    if (!v.is_string()) throw ValidationError(field, "expected a node id");
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i] == v.get<std::string>()) return static_cast<int>(i);
    }
    throw ValidationError(field, "unknown node " + v.get<std::string>());
  };

  std::vector<Edge> edges;
  const Json& jedges = require(doc, "edges", "");
  for (size_t e = 0; e < jedges.size(); ++e) {
    std::string base = "edges[" + std::to_string(e) + "].";
    const Json& je = jedges[e];
    Edge edge;
    edge.id = require(je, "id", base).get<std::string>();
    edge.tail = node_index(require(je, "tail", base), base + "tail");
    edge.head = node_index(require(je, "head", base), base + "head");
    const Json& jpieces = require(je, "pieces", base);
    for (size_t k = 0; k < jpieces.size(); ++k) {
      std::string pbase = base + "pieces[" + std::to_string(k) + "].";
      CostPiece piece;
      piece.breakpoint = rational_from_json(require(jpieces[k], "breakpoint", pbase),
                                            pbase + "breakpoint");
      piece.slope = rational_from_json(require(jpieces[k], "slope", pbase), pbase + "slope");
      piece.offset = rational_from_json(require(jpieces[k], "offset", pbase), pbase + "offset");
      edge.pieces.push_back(std::move(piece));
    }
    const Json& jext = require(je, "externality", base);
    for (const auto& cls : externalities) {
      ExternalityCoef coef;
      auto it = jext.find(cls);
      if (it != jext.end()) {
        std::string ebase = base + "externality." + cls + ".";
        coef.g = rational_from_json(require(*it, "g", ebase), ebase + "g");
        if (it->contains("gamma")) {
          coef.gamma = rational_from_json((*it)["gamma"], ebase + "gamma");
        }
      }
      edge.externality.push_back(std::move(coef));
    }
    for (auto it = jext.begin(); it != jext.end(); ++it) {
      if (std::find(externalities.begin(), externalities.end(), it.key()) ==
          externalities.end()) {
        throw ValidationError(base + "externality." + it.key(), "unknown externality class");
      }
    }
    edges.push_back(std::move(edge));
  }

  std::vector<Commodity> commodities;
  const Json& jcomms = require(doc, "commodities", "");
  for (size_t i = 0; i < jcomms.size(); ++i) {
    std::string base = "commodities[" + std::to_string(i) + "].";
    Commodity c;
    c.source = node_index(require(jcomms[i], "source", base), base + "source");
    c.target = node_index(require(jcomms[i], "target", base), base + "target");
    c.demand = rational_from_json(require(jcomms[i], "demand", base), base + "demand");
    commodities.push_back(std::move(c));
  }

  return Instance::create(std::move(nodes), std::move(externalities), std::move(edges),
                          std::move(commodities));
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("", "cannot open instance file " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const std::exception& e) {
    throw ValidationError("", std::string("instance file is not valid JSON: ") + e.what());
  }
  return instance_from_json(doc);
}

Flow flow_from_json(const Instance& instance, const Json& doc) {
  if (!doc.is_object()) throw ValidationError("", "flow document must be an object");
  const Json& flows = require(doc, "flows", "");
  std::vector<std::vector<Rational>> values(
      instance.commodity_count(), std::vector<Rational>(instance.edge_count(), Rational(0)));
  for (auto it = flows.begin(); it != flows.end(); ++it) {
    int commodity = -1;
    try {
      commodity = std::stoi(it.key());
    } catch (const std::exception&) {
      throw ValidationError("flows." + it.key(), "commodity keys are indices");
    }
    if (commodity < 0 || commodity >= instance.commodity_count()) {
      throw ValidationError("flows." + it.key(), "commodity index out of range");
    }
    for (auto ev = it->begin(); ev != it->end(); ++ev) {
      auto e = instance.edge_index(ev.key());
      if (!e) throw ValidationError("flows." + it.key() + "." + ev.key(), "unknown edge");
      values[commodity][*e] =
          rational_from_json(*ev, "flows." + it.key() + "." + ev.key());
    }
  }
  return Flow::create(instance, std::move(values));
}

Flow load_flow(const Instance& instance, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("", "cannot open flow file " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const std::exception& e) {
    throw ValidationError("", std::string("flow file is not valid JSON: ") + e.what());
  }
  return flow_from_json(instance, doc);
}

Json flow_to_json(const Instance& instance, const Flow& flow) {
  Json doc = Json::object();
  Json flows = Json::object();
  for (int i = 0; i < instance.commodity_count(); ++i) {
    Json per_edge = Json::object();
    for (int e = 0; e < instance.edge_count(); ++e) {
      per_edge[instance.edge(e).id] = flow.value(i, e).str();
    }
    flows[std::to_string(i)] = std::move(per_edge);
  }
  doc["flows"] = std::move(flows);
  Json loads = Json::object();
  for (int e = 0; e < instance.edge_count(); ++e) {
    loads[instance.edge(e).id] = flow.load(e).str();
  }
  doc["edge_loads"] = std::move(loads);
  Json totals = Json::object();
  auto g = total_externality(instance, flow);
  for (int j = 0; j < instance.externality_count(); ++j) {
    totals[instance.externalities()[j]] = g[j].str();
  }
  doc["G"] = std::move(totals);
  doc["Phi"] = potential(instance, flow).str();
  return doc;
}

}  // namespace tollcast
