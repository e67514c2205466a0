#include "mobsim/pedigree.hpp"

#include <cmath>

#include "mobsim/errors.hpp"

namespace mobsim {

void Pedigree::rebuild_index() {
  index_.clear();
  index_.reserve(persons.size());
  for (std::size_t i = 0; i < persons.size(); ++i) {
    index_.emplace(persons[i].person_id, i);
  }
}

const Person* Pedigree::find(std::int64_t person_id) const {
  if (person_id == kNoPerson) return nullptr;
  auto it = index_.find(person_id);
  return it == index_.end() ? nullptr : &persons[it->second];
}

const Person* Pedigree::ancestor(const Person& p, int hops, Line line) const {
  const Person* cur = &p;
  for (int i = 0; i < hops && cur != nullptr; ++i) {
    cur = find(line == Line::Father ? cur->father_id : cur->mother_id);
  }
  return cur;
}

int Pedigree::max_generation() const {
  int g = 0;
  for (const auto& p : persons) g = std::max(g, p.generation);
  return g;
}

void Pedigree::validate() const {
  if (index_.size() != persons.size()) {
    throw DataError("duplicate person_id in pedigree (" +
                    std::to_string(persons.size() - index_.size()) + " collisions)");
  }
  for (const auto& p : persons) {
    const std::string who = "person " + std::to_string(p.person_id);
    if (p.person_id == kNoPerson) throw DataError("person_id must be non-negative");
    if (p.generation < 0) throw DataError(who + ": negative generation");
    if (!std::isfinite(p.y)) throw DataError(who + ": non-finite y");
    for (auto [link, name] : {std::pair{p.father_id, "father_id"},
                              std::pair{p.mother_id, "mother_id"}}) {
      if (link == kNoPerson) continue;
      const Person* parent = find(link);
      if (parent == nullptr) {
        throw DataError(who + ": " + name + " " + std::to_string(link) + " not in panel");
      }
      if (parent->generation != p.generation - 1) {
        throw DataError(who + ": " + name + " " + std::to_string(link) +
                        " is not exactly one generation above the child");
      }
    }
    if (p.spouse_id != kNoPerson) {
      const Person* spouse = find(p.spouse_id);
      if (spouse == nullptr) {
        throw DataError(who + ": spouse_id " + std::to_string(p.spouse_id) +
                        " not in panel");
      }
      if (spouse->generation != p.generation) {
        throw DataError(who + ": spouse " + std::to_string(p.spouse_id) +
                        " is in a different generation");
      }
      if (spouse->spouse_id != p.person_id) {
        throw DataError(who + ": spouse link to " + std::to_string(p.spouse_id) +
                        " is not symmetric");
      }
    }
  }
}

}  // namespace mobsim
