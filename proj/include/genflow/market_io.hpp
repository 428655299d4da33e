// JSON reader/writer for market instances.
//
// Format:
//   {
//     "buyers":    [{"id": "a", "budget": 3, "disagreement": 1}, ...],
//     "goods":     ["g1", "g2", ...],
//     "utilities": [["a", "g1", 4], ["a", "g2", "pow 1 1/2"], ...]
//   }
//
// Buyers and goods are numbered in order of appearance; utility rows refer to
// them by id (or by 0-based index, for generated corpora).  A utility entry
// is either a nonnegative integer or a gain-spec string (price-discrimination
// mode) in the same `lin|log|pow|pwl ...` syntax the .cgf arc lines use.
// "disagreement" is optional and defaults to 0 (Fisher).

#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "genflow/market.hpp"

namespace genflow {

namespace detail {

// Line number of a byte offset, for parse errors ("<file>:<line>: ...").
inline int line_of_offset(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

inline Integer json_integer(const nlohmann::json& v, const std::string& where,
                            const char* what) {
  if (v.is_number_integer())
    return Integer(static_cast<long>(v.get<long long>()));
  if (v.is_string()) {
    Rational q = parse_rational(v.get<std::string>(), where);
    if (q.get_den() != 1)
      throw input_error(where + ": " + what + " must be an integer");
    return q.get_num();
  }
  throw input_error(where + ": " + what + " must be an integer");
}

}  // namespace detail

inline MarketInstance read_market(std::istream& in,
                                  const std::string& filename = "<input>") {
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw input_error(filename + ":" +
                      std::to_string(detail::line_of_offset(text, e.byte)) +
                      ": " + e.what());
  }
  const std::string where = filename;
  if (!j.is_object()) throw input_error(where + ": top level must be an object");
  for (const auto& [key, _] : j.items())
    if (key != "buyers" && key != "goods" && key != "utilities")
      throw input_error(where + ": unknown key '" + key + "'");
  if (!j.contains("buyers") || !j["buyers"].is_array())
    throw input_error(where + ": missing 'buyers' array");
  if (!j.contains("goods") || !j["goods"].is_array())
    throw input_error(where + ": missing 'goods' array");
  if (!j.contains("utilities") || !j["utilities"].is_array())
    throw input_error(where + ": missing 'utilities' array");

  MarketInstance inst;
  std::map<std::string, int> buyer_ix, good_ix;
  for (const auto& b : j["buyers"]) {
    if (!b.is_object() || !b.contains("id") || !b["id"].is_string() ||
        !b.contains("budget"))
      throw input_error(where + ": each buyer needs 'id' and 'budget'");
    for (const auto& [key, _] : b.items())
      if (key != "id" && key != "budget" && key != "disagreement")
        throw input_error(where + ": unknown buyer key '" + key + "'");
    MarketBuyer mb;
    mb.id = b["id"].get<std::string>();
    mb.budget = detail::json_integer(b["budget"], where, "budget");
    if (b.contains("disagreement"))
      mb.disagreement =
          detail::json_integer(b["disagreement"], where, "disagreement");
    if (!buyer_ix.emplace(mb.id, inst.nb()).second)
      throw input_error(where + ": duplicate buyer id '" + mb.id + "'");
    inst.buyers.push_back(std::move(mb));
  }
  for (const auto& g : j["goods"]) {
    std::string id;
    if (g.is_string())
      id = g.get<std::string>();
    else if (g.is_object() && g.contains("id") && g["id"].is_string())
      id = g["id"].get<std::string>();
    else
      throw input_error(where + ": each good is an id string");
    if (!good_ix.emplace(id, inst.ng()).second)
      throw input_error(where + ": duplicate good id '" + id + "'");
    inst.goods.push_back(std::move(id));
  }

  auto resolve = [&](const nlohmann::json& v, const std::map<std::string, int>& ix,
                     int count, const char* what) -> int {
    if (v.is_number_integer()) {
      long k = v.get<long long>();
      if (k < 0 || k >= count)
        throw input_error(where + ": " + what + " index out of range");
      return static_cast<int>(k);
    }
    if (v.is_string()) {
      auto it = ix.find(v.get<std::string>());
      if (it == ix.end())
        throw input_error(where + ": unknown " + what + " '" +
                          v.get<std::string>() + "'");
      return it->second;
    }
    throw input_error(where + ": " + what + " must be an id or index");
  };

  for (const auto& u : j["utilities"]) {
    if (!u.is_array() || u.size() != 3)
      throw input_error(where + ": each utility row is [buyer, good, value]");
    MarketPair p;
    p.buyer = resolve(u[0], buyer_ix, inst.nb(), "buyer");
    p.good = resolve(u[1], good_ix, inst.ng(), "good");
    if (u[2].is_string()) {
      const std::string s = u[2].get<std::string>();
      const auto toks = detail::split_ws(s);
      // Distinguish a plain integer string from a gain spec.
      if (toks.size() == 1) {
        p.util = detail::json_integer(u[2], where, "utility");
      } else {
        p.gain = detail::parse_gain_tokens(toks, 0, where);
      }
    } else {
      p.util = detail::json_integer(u[2], where, "utility");
    }
    if (p.util < 0)
      throw input_error(where + ": utilities must be nonnegative");
    inst.pairs.push_back(std::move(p));
  }
  try {
    inst.validate();
  } catch (const input_error& e) {
    throw input_error(where + ": " + e.what());
  }
  return inst;
}

inline void write_market(std::ostream& os, const MarketInstance& inst) {
  nlohmann::ordered_json j;
  j["buyers"] = nlohmann::ordered_json::array();
  for (const auto& b : inst.buyers) {
    nlohmann::ordered_json jb;
    jb["id"] = b.id;
    jb["budget"] = b.budget.get_si();
    if (b.disagreement != 0) jb["disagreement"] = b.disagreement.get_si();
    j["buyers"].push_back(std::move(jb));
  }
  j["goods"] = inst.goods;
  j["utilities"] = nlohmann::ordered_json::array();
  for (const auto& p : inst.pairs) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    row.push_back(inst.buyers[p.buyer].id);
    row.push_back(inst.goods[p.good]);
    if (p.gain) {
      std::ostringstream gs;
      switch (p.gain->kind) {
        case GainKind::Linear:
          gs << "lin " << rational_to_string(p.gain->gamma);
          break;
        case GainKind::Log:
          gs << "log " << rational_to_string(p.gain->c);
          break;
        case GainKind::Pow:
          gs << "pow " << rational_to_string(p.gain->c) << " "
             << rational_to_string(p.gain->p);
          break;
        case GainKind::Pwl: {
          gs << "pwl " << p.gain->px.size();
          for (std::size_t k = 0; k < p.gain->px.size(); ++k)
            gs << " " << rational_to_string(p.gain->px[k]) << " "
               << rational_to_string(p.gain->py[k]);
          break;
        }
        case GainKind::Custom:
          throw input_error("custom gains are not serializable");
      }
      row.push_back(gs.str());
    } else {
      row.push_back(p.util.get_si());
    }
    j["utilities"].push_back(std::move(row));
  }
  os << j.dump(2) << "\n";
}

}  // namespace genflow
