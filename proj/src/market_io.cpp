#include "rrc/market_io.hpp"

#include <fstream>
#include <sstream>

namespace rrc {

Json market_to_json(const Market& m) {
  Json colleges = Json::array();
  for (int q : m.college_quotas()) colleges.push_back({{"quota", q}});

  Json resources = Json::array();
  for (const auto& spec : m.resources()) {
    resources.push_back({{"quota", spec.quota}, {"region", spec.region}});
  }

  Json preferences = Json::array();
  for (const auto& list : m.all_preferences()) {
    Json row = Json::array();
    for (const Choice& x : list) row.push_back(Json::array({x.college, x.resource}));
    preferences.push_back(std::move(row));
  }

  return {{"students", m.n_students()},
          {"colleges", std::move(colleges)},
          {"resources", std::move(resources)},
          {"priorities", m.priorities()},
          {"preferences", std::move(preferences)}};
}

Market market_from_json(const Json& doc) {
  try {
    const int n = doc.at("students").get<int>();
    std::vector<int> quotas;
    for (const auto& c : doc.at("colleges")) quotas.push_back(c.at("quota").get<int>());

    std::vector<ResourceSpec> resources;
    if (doc.contains("resources")) {
      for (const auto& r : doc.at("resources")) {
        resources.push_back({r.at("quota").get<int>(), r.at("region").get<std::vector<int>>()});
      }
    }

    auto priorities = doc.at("priorities").get<std::vector<std::vector<int>>>();
    if (priorities.size() != quotas.size()) {
      throw Error("market document: priorities must have one row per college");
    }

    std::vector<std::vector<Choice>> preferences;
    for (const auto& row : doc.at("preferences")) {
      std::vector<Choice> list;
      for (const auto& pair : row) {
        if (!pair.is_array() || pair.size() != 2) {
          throw Error("market document: preference entries must be [college, resource]");
        }
        list.push_back({pair[0].get<int>(), pair[1].get<int>()});
      }
      preferences.push_back(std::move(list));
    }
    if (static_cast<int>(preferences.size()) != n) {
      throw Error("market document: preferences must have one row per student");
    }
    return Market(n, std::move(quotas), std::move(resources), std::move(priorities),
                  std::move(preferences));
  } catch (const Json::exception& e) {
    throw Error(std::string("market document: ") + e.what());
  }
}

std::string dump_market(const Market& m) { return market_to_json(m).dump(2) + "\n"; }

Market parse_market(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(std::string("market document: ") + e.what());
  }
  return market_from_json(doc);
}

Market load_market(const std::filesystem::path& path) {
  try {
    return parse_market(read_text(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void save_market(const Market& m, const std::filesystem::path& path) {
  write_text(path, dump_market(m));
}

Json contract_to_json(const Contract& x) {
  return Json::array({x.student, x.college, x.resource});
}

Json matching_to_json(const Matching& mu) {
  Json out = Json::array();
  for (const auto& x : mu.contracts()) out.push_back(contract_to_json(x));
  return out;
}

Matching matching_from_json(const Json& doc, int n_students) {
  Matching mu(n_students);
  for (const auto& x : doc) {
    mu.add({x.at(0).get<int>(), x.at(1).get<int>(), x.at(2).get<int>()});
  }
  return mu;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace rrc
