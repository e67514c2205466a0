#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

namespace mobsim {

inline constexpr std::int64_t kNoPerson = -1;

// One row of a pedigree panel. Missing links are kNoPerson; latent
// endowments are NaN when the generating model does not track them.
struct Person {
  std::int64_t person_id = kNoPerson;
  std::int64_t dynasty_id = 0;
  int generation = 0;
  std::int64_t father_id = kNoPerson;
  std::int64_t mother_id = kNoPerson;
  std::int64_t spouse_id = kNoPerson;
  double y = 0.0;
  double e1 = std::numeric_limits<double>::quiet_NaN();
  double e2 = std::numeric_limits<double>::quiet_NaN();
};

struct SimTopology {
  std::int64_t n_dynasties = 0;
  int generations = 0;
  int children_per_family = 1;
  std::uint64_t seed = 0;
};

// Explicit multigeneration family graph. `model` and `topology` describe how
// the panel was produced; loaded external panels carry model = "external"
// and a topology inferred from the data.
class Pedigree {
 public:
  std::vector<Person> persons;
  SimTopology topology;
  std::string model = "external";

  // Rebuilds the person_id lookup; call after any structural change.
  void rebuild_index();

  const Person* find(std::int64_t person_id) const;

  // Ancestor reached by walking `hops` father (or mother) links; nullptr
  // when the chain is broken.
  enum class Line { Father, Mother };
  const Person* ancestor(const Person& p, int hops, Line line = Line::Father) const;

  int max_generation() const;

  // Referential and structural checks: unique ids, resolvable links, parents
  // exactly one generation above their children, symmetric within-generation
  // spouse links, finite y. Throws DataError naming the first offending
  // person.
  void validate() const;

 private:
  std::unordered_map<std::int64_t, std::size_t> index_;
};

}  // namespace mobsim
