#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "bnblab/model.hpp"
#include "bnblab/rational.hpp"

namespace bnblab {

// Instance file format: a single JSON document with fields
//   name, variables [{name, lower, upper, integer}],
//   constraints [{label, terms: [{var, coef}], sense, rhs}],
//   objective [{var, coef}]
// All numbers are exact strings, either decimals ("0.3") or "p/q".
// serialize always emits the canonical "p" / "p/q" form, so
// parse(serialize(x)) == x.

inline nlohmann::ordered_json instance_to_json(const MipInstance& inst) {
  nlohmann::ordered_json doc;
  doc["name"] = inst.name;
  doc["variables"] = nlohmann::ordered_json::array();
  for (const Variable& v : inst.variables) {
    doc["variables"].push_back({{"name", v.name},
                                {"lower", to_string(v.lower)},
                                {"upper", to_string(v.upper)},
                                {"integer", v.is_integer}});
  }
  doc["constraints"] = nlohmann::ordered_json::array();
  for (const LinearConstraint& con : inst.constraints) {
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    for (const auto& [var, coef] : con.coefficients)
      terms.push_back({{"var", var}, {"coef", to_string(coef)}});
    doc["constraints"].push_back({{"label", con.label},
                                  {"terms", std::move(terms)},
                                  {"sense", sense_text(con.sense)},
                                  {"rhs", to_string(con.rhs)}});
  }
  doc["objective"] = nlohmann::ordered_json::array();
  for (const auto& [var, coef] : inst.objective)
    doc["objective"].push_back({{"var", var}, {"coef", to_string(coef)}});
  return doc;
}

inline std::string serialize_instance(const MipInstance& inst) {
  return instance_to_json(inst).dump(2) + "\n";
}

inline MipInstance instance_from_json(const nlohmann::json& doc) {
  MipInstance inst;
  inst.name = doc.at("name").get<std::string>();

  int index = 0;
  for (const auto& v : doc.at("variables")) {
    Variable var;
    var.index = index++;
    var.name = v.at("name").get<std::string>();
    var.lower = parse_rational(v.at("lower").get<std::string>());
    var.upper = parse_rational(v.at("upper").get<std::string>());
    var.is_integer = v.at("integer").get<bool>();
    inst.variables.push_back(std::move(var));
  }

  for (const auto& c : doc.at("constraints")) {
    LinearConstraint con;
    con.label = c.at("label").get<std::string>();
    const std::string sense = c.at("sense").get<std::string>();
    if (sense == "<=") con.sense = Sense::LessEqual;
    else if (sense == ">=") con.sense = Sense::GreaterEqual;
    else if (sense == "=") con.sense = Sense::Equal;
    else throw std::invalid_argument("unknown constraint sense '" + sense + "'");
    con.rhs = parse_rational(c.at("rhs").get<std::string>());
    for (const auto& t : c.at("terms"))
      con.coefficients[t.at("var").get<int>()] = parse_rational(t.at("coef").get<std::string>());
    inst.constraints.push_back(std::move(con));
  }

  for (const auto& t : doc.at("objective"))
    inst.objective[t.at("var").get<int>()] = parse_rational(t.at("coef").get<std::string>());
  return inst;
}

inline MipInstance parse_instance(const std::string& text) {
  return instance_from_json(nlohmann::json::parse(text));
}

inline void write_instance_file(const MipInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << serialize_instance(inst);
}

inline MipInstance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

}  // namespace bnblab
