#include "scenezsl/scenegen/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "scenezsl/parallel.hpp"
#include "scenezsl/rng.hpp"

namespace scenezsl::scenegen {

namespace {

struct Box {
  Vec3 lo{};
  Vec3 hi{};
};

Box bounds(const std::vector<Vec3>& points) {
  Box box{{points[0]}, {points[0]}};
  for (const Vec3& p : points) {
    for (int c = 0; c < 3; ++c) {
      box.lo[c] = std::min(box.lo[c], p[c]);
      box.hi[c] = std::max(box.hi[c], p[c]);
    }
  }
  return box;
}

// Euclidean distance between two boxes projected on the xy plane, with the
// first box shifted by (dx, dy).
double planar_gap(const Box& a, const Box& b, double dx, double dy) {
  const double gx = std::max({0.0, (a.lo[0] + dx) - b.hi[0], b.lo[0] - (a.hi[0] + dx)});
  const double gy = std::max({0.0, (a.lo[1] + dy) - b.hi[1], b.lo[1] - (a.hi[1] + dy)});
  return std::hypot(gx, gy);
}

// Horizontal offset along a random direction that leaves the xy bounding
// boxes exactly `gap` apart.
Vec3 side_by_side_offset(const Box& a, const Box& b, double gap, Philox& rng) {
  const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double ux = std::cos(theta), uy = std::sin(theta);
  double lo = 0.0;
  double hi = (a.hi[0] - a.lo[0]) + (a.hi[1] - a.lo[1]) + (b.hi[0] - b.lo[0]) +
              (b.hi[1] - b.lo[1]) + std::abs(a.lo[0]) + std::abs(a.hi[0]) + std::abs(b.lo[0]) +
              std::abs(b.hi[0]) + std::abs(a.lo[1]) + std::abs(a.hi[1]) + std::abs(b.lo[1]) +
              std::abs(b.hi[1]) + 2.0 * gap + 1.0;
  // The gap is non-decreasing in the travel distance along a ray that starts
  // with the boxes overlapping.
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (planar_gap(a, b, mid * ux, mid * uy) < gap) lo = mid; else hi = mid;
  }
  return {hi * ux, hi * uy, 0.0};
}

void scale_translate(std::vector<Vec3>& points, double alpha, const Vec3& beta) {
  for (Vec3& p : points) {
    p = {alpha * p[0] + beta[0], alpha * p[1] + beta[1], alpha * p[2] + beta[2]};
  }
}

bool all_finite(const PointCloud& cloud) {
  return std::all_of(cloud.points.begin(), cloud.points.end(), [](const Vec3& p) {
    return std::isfinite(p[0]) && std::isfinite(p[1]) && std::isfinite(p[2]);
  });
}

}  // namespace

void SceneParams::validate() const {
  if (!(alpha_small > 0.0 && alpha_small < 1.0 && alpha_big > 1.0)) {
    throw std::invalid_argument("scene params need 0 < alpha_small < 1 < alpha_big");
  }
  if (n_points == 0) throw std::invalid_argument("scene params need n_points > 0");
  if (!(jitter_sigma >= 0.0)) throw std::invalid_argument("jitter_sigma must be >= 0");
  if (!(close_gap.lo >= 0.0 && close_gap.lo <= close_gap.hi && pair_gap.lo >= 0.0 &&
        pair_gap.lo <= pair_gap.hi && center_jitter >= 0.0)) {
    throw std::invalid_argument("placement ranges must be non-negative and ordered");
  }
}

SceneError::SceneError(Code code, const std::string& detail)
    : std::runtime_error(detail), code_(code) {}

std::string render_record(const SceneRecord& record) {
  const PromptTemplate& tmpl = prompt_templates().at(static_cast<std::size_t>(record.template_id));
  if (tmpl.arity == 2) {
    if (!record.class_b) throw ArityMismatch("record lacks the second class");
    return render_prompt(tmpl, record.class_a, *record.class_b);
  }
  return render_prompt(tmpl, record.class_a);
}

PointCloud apply_augmentation(const PointCloud& cloud, const SceneParams& params,
                              std::uint64_t seed) {
  PointCloud out = cloud;
  Philox rng(seed);
  if (params.rotation == Rotation::kYawOnly) {
    const double yaw = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double c = std::cos(yaw), s = std::sin(yaw);
    for (Vec3& p : out.points) {
      p = {c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]};
    }
  }
  if (params.jitter_sigma > 0.0) {
    const double sigma = params.jitter_sigma;
    const double clip = 3.0 * sigma;
    for (Vec3& p : out.points) {
      for (double& coord : p) {
        coord += std::clamp(sigma * rng.normal(), -clip, clip);
      }
    }
  }
  return out;
}

SceneSample compose_scene(const PromptTemplate& tmpl, const Operand& a,
                          const std::optional<Operand>& b, const SceneParams& params,
                          std::uint64_t seed) {
  const int operands = tmpl.operand_count();
  if ((operands == 2) != b.has_value()) {
    throw SceneError(SceneError::Code::kArityMismatch,
                     "template " + std::to_string(tmpl.id) + " needs " + std::to_string(operands) +
                         " operand(s)");
  }
  if (a.cloud.empty() || !all_finite(a.cloud) || (b && (b->cloud.empty() || !all_finite(b->cloud)))) {
    throw SceneError(SceneError::Code::kDegenerateOperand, "operand cloud is empty or non-finite");
  }

  SceneSample sample;
  SceneRecord& record = sample.record;
  record.template_id = tmpl.id;
  record.class_a = a.class_name;
  if (tmpl.arity == 2) record.class_b = b->class_name;
  record.seed = seed;
  record.alpha_a = tmpl.size_tag == SizeTag::kBig     ? params.alpha_big
                   : tmpl.size_tag == SizeTag::kSmall ? params.alpha_small
                                                      : 1.0;

  PointCloud first = apply_augmentation(a.cloud, params, derive_seed(seed, {1}));
  std::vector<Vec3>& pa = first.points;
  scale_translate(pa, record.alpha_a, {0.0, 0.0, 0.0});

  std::vector<Vec3> pb;
  if (b) {
    PointCloud second = apply_augmentation(b->cloud, params, derive_seed(seed, {2}));
    pb = std::move(second.points);
    const Box box_a = bounds(pa);
    const Box box_b = bounds(pb);
    Philox layout(derive_seed(seed, {3}));
    Vec3 shift{0.0, 0.0, 0.0};
    switch (tmpl.relation) {
      case Relation::kClose:
      case Relation::kClosePair:
        shift = side_by_side_offset(box_a, box_b,
                                    layout.uniform(params.close_gap.lo, params.close_gap.hi), layout);
        break;
      case Relation::kPair:
        shift = side_by_side_offset(box_a, box_b,
                                    layout.uniform(params.pair_gap.lo, params.pair_gap.hi), layout);
        break;
      case Relation::kOn:
      case Relation::kUnder: {
        const double jx = layout.uniform(-params.center_jitter, params.center_jitter);
        const double jy = layout.uniform(-params.center_jitter, params.center_jitter);
        shift[0] = 0.5 * (box_b.lo[0] + box_b.hi[0]) - 0.5 * (box_a.lo[0] + box_a.hi[0]) + jx;
        shift[1] = 0.5 * (box_b.lo[1] + box_b.hi[1]) - 0.5 * (box_a.lo[1] + box_a.hi[1]) + jy;
        shift[2] = tmpl.relation == Relation::kOn ? box_b.hi[2] - box_a.lo[2]
                                                  : box_b.lo[2] - box_a.hi[2];
        break;
      }
      case Relation::kNone:
        break;
    }
    record.beta_a = shift;
    scale_translate(pa, 1.0, shift);
  }

  // Subsample the union (or resize a single operand) to n_points. Indices are
  // kept in ascending order so operand blocks stay contiguous.
  const std::size_t total = pa.size() + pb.size();
  std::vector<std::size_t> keep;
  if (total == params.n_points) {
    keep.resize(total);
    std::iota(keep.begin(), keep.end(), std::size_t{0});
  } else {
    Philox pick(derive_seed(seed, {4}));
    std::vector<std::size_t> index(total);
    std::iota(index.begin(), index.end(), std::size_t{0});
    if (total > params.n_points) {
      for (std::size_t i = 0; i < params.n_points; ++i) {
        std::swap(index[i], index[i + pick.below(total - i)]);
      }
      index.resize(params.n_points);
    } else {
      while (index.size() < params.n_points) index.push_back(pick.below(total));
    }
    std::sort(index.begin(), index.end());
    keep = std::move(index);
  }

  sample.cloud.points.reserve(keep.size());
  sample.operand_of_point.reserve(keep.size());
  for (std::size_t i : keep) {
    if (i < pa.size()) {
      sample.cloud.points.push_back(pa[i]);
      sample.operand_of_point.push_back(0);
    } else {
      sample.cloud.points.push_back(pb[i - pa.size()]);
      sample.operand_of_point.push_back(1);
    }
  }
  sample.prompt_text = render_record(record);
  return sample;
}

std::size_t ObjectBank::total_objects() const noexcept {
  std::size_t n = 0;
  for (const auto& list : objects) n += list.size();
  return n;
}

void ObjectBank::add(const std::string& class_name, PointCloud cloud) {
  auto it = std::find(classes.begin(), classes.end(), class_name);
  if (it == classes.end()) {
    classes.push_back(class_name);
    objects.emplace_back();
    it = classes.end() - 1;
  }
  objects[static_cast<std::size_t>(it - classes.begin())].push_back(std::move(cloud));
}

ObjectBank ObjectBank::from_split(const dataset::SeenUnseenSplit& split) {
  ObjectBank bank;
  bank.classes = split.seen_classes;
  bank.objects.resize(bank.classes.size());
  for (const auto& item : split.train_items) {
    const auto index = split.seen_index(item.class_name);
    if (!index) continue;
    PointCloud cloud = dataset::normalize_unit_sphere(dataset::read_pcb1(split.resolve(item).string()));
    cloud.class_id = static_cast<int>(*index);
    bank.objects[*index].push_back(std::move(cloud));
  }
  // Classes without training objects cannot be drawn.
  ObjectBank filled;
  for (std::size_t c = 0; c < bank.classes.size(); ++c) {
    if (!bank.objects[c].empty()) {
      filled.classes.push_back(bank.classes[c]);
      filled.objects.push_back(std::move(bank.objects[c]));
    }
  }
  return filled;
}

std::vector<SceneSample> generate_batch(const ObjectBank& bank, const SceneParams& params,
                                        std::size_t batch_size, std::uint64_t seed,
                                        std::size_t threads) {
  params.validate();
  if (bank.classes.size() < 2) {
    throw SceneError(SceneError::Code::kInsufficientClasses,
                     "scene generation needs at least 2 seen classes with objects, have " +
                         std::to_string(bank.classes.size()));
  }
  const auto& templates = prompt_templates();
  std::vector<SceneSample> batch(batch_size);
  parallel_for(batch_size, threads, [&](std::size_t i) {
    const std::uint64_t sample_seed = derive_seed(seed, {i});
    Philox rng(sample_seed);
    const PromptTemplate& tmpl = templates[rng.below(templates.size())];
    const std::size_t ca = rng.below(bank.classes.size());
    const auto& pool_a = bank.objects[ca];
    const PointCloud& obj_a = pool_a[rng.below(pool_a.size())];
    std::optional<Operand> second;
    if (tmpl.arity == 2) {
      std::size_t cb = rng.below(bank.classes.size() - 1);
      if (cb >= ca) ++cb;
      const auto& pool_b = bank.objects[cb];
      second.emplace(Operand{pool_b[rng.below(pool_b.size())], bank.classes[cb]});
    } else if (tmpl.operand_count() == 2) {
      second.emplace(Operand{pool_a[rng.below(pool_a.size())], bank.classes[ca]});
    }
    batch[i] = compose_scene(tmpl, Operand{obj_a, bank.classes[ca]}, second, params,
                             derive_seed(sample_seed, {0xC0}));
  });
  return batch;
}

PointCloud prepare_for_encoder(const SceneSample& sample, SceneNormalization mode) {
  if (mode == SceneNormalization::kUnitSphere) {
    return dataset::normalize_unit_sphere(sample.cloud);
  }
  return sample.cloud;
}

}  // namespace scenezsl::scenegen
