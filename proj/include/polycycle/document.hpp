#pragma once

#include <json.hpp>

#include <string>

#include "polycycle/analysis.hpp"
#include "polycycle/oracle.hpp"

namespace polycycle {

using Json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

/// Finite doubles as numbers, anything else as null, so the document round-trips exactly.
Json number(double v);

Json to_json(const Point& p);
Json to_json(const Interval& i);
Json to_json(const LocalChart& c);
Json to_json(const DulacExpansion& d);
Json to_json(const ReturnExpansion& r);
Json to_json(const DisplacementExpansion& d);
Json to_json(const IndependenceReport& r);
Json to_json(const NotIdentityEvidence& e);
Json to_json(const CyclicityVerdict& v);
Json to_json(const LadderResult& l);
Json to_json(const FitReport& f);
Json to_json(const CycleScan& c);
Json to_json(const ComposeCheckReport& r);

Json provenance(const std::string& command, const Model* m, const Binding* b);

Json analysis_document(const Model& m, const Analysis& a);

}  // namespace polycycle
