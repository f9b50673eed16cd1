#pragma once

#include "json.hpp"
#include "tollcast/model.hpp"

namespace tollcast {

using Json = nlohmann::ordered_json;

/// Parses and validates an instance document:
///   {"nodes": [...], "externalities": [...],
///    "edges": [{id, tail, head, pieces: [{breakpoint, slope, offset}],
///               externality: {class: {g, gamma?}}}],
///    "commodities": [{source, target, demand}]}
/// Numbers are exact rational strings ("3/2", "1.25") or JSON integers.
/// Throws ValidationError carrying the offending field path.
Instance instance_from_json(const Json& doc);
Instance load_instance(const std::string& path);

/// Flow document: {"flows": {commodity index -> {edge id -> value}}} plus
/// the derived fields emitted by flow_to_json. Derived fields present in
/// the input are ignored and recomputed.
Flow flow_from_json(const Instance& instance, const Json& doc);
Flow load_flow(const Instance& instance, const std::string& path);

/// Serializes a flow with its derived quantities: edge loads, per-class
/// externality totals, and the travel-time potential.
Json flow_to_json(const Instance& instance, const Flow& flow);

/// Exact rational from a JSON string or integer; throws ValidationError
/// mentioning `field` otherwise.
Rational rational_from_json(const Json& value, const std::string& field);

}  // namespace tollcast
