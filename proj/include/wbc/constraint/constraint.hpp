#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "wbc/common.hpp"
#include "wbc/linalg.hpp"
#include "wbc/param/parameter.hpp"
#include "wbc/rbd/model.hpp"

namespace wbc::constraint {

/// Runtime-settable constraint inputs, copied to the model updater under its guard.
struct ConstraintInputs {
  bool enabled = true;
  double ratio = 1.0;
};

class Constraint {
 public:
  Constraint(std::string name, std::string typeName, int rows)
      : name_(std::move(name)), typeName_(std::move(typeName)), rows_(rows) {}
  virtual ~Constraint() = default;

  const std::string& name() const { return name_; }
  const std::string& typeName() const { return typeName_; }
  /// Number of constrained directions.
  int rows() const { return rows_; }

  bool enabled() const { return inputs_.enabled; }
  void setEnabled(bool enabled) { inputs_.enabled = enabled; }
  const ConstraintInputs& inputs() const { return inputs_; }

  /// Writes rows() x n_dofs Jacobian rows.
  virtual void jacobian(const rbd::RobotModel& model, const ConstraintInputs& inputs, Eigen::Ref<Matrix> out) const = 0;
  Matrix jacobian(const rbd::RobotModel& model) const;

  /// True when the constraint removes the freedom of this real joint.
  virtual bool constrainsJoint(std::string_view) const { return false; }

  virtual void declareParameters(param::ParameterRegistry& registry);

 protected:
  ConstraintInputs inputs_;

 private:
  std::string name_;
  std::string typeName_;
  int rows_;
};

/// Welds a link: both translation and rotation (6 rows).
class FlatContactConstraint : public Constraint {
 public:
  FlatContactConstraint(std::string name, const rbd::RobotModel& model, std::string link);
  const std::string& link() const { return linkName_; }
  using Constraint::jacobian;
  void jacobian(const rbd::RobotModel& model, const ConstraintInputs& inputs, Eigen::Ref<Matrix> out) const override;

 private:
  std::string linkName_;
  int link_;
};

/// Pins a point of a link in place (3 rows).
class PointContactConstraint : public Constraint {
 public:
  PointContactConstraint(std::string name, const rbd::RobotModel& model, std::string link, const Vector3& point);
  const std::string& link() const { return linkName_; }
  const Vector3& point() const { return point_; }
  using Constraint::jacobian;
  void jacobian(const rbd::RobotModel& model, const ConstraintInputs& inputs, Eigen::Ref<Matrix> out) const override;

 private:
  std::string linkName_;
  int link_;
  Vector3 point_;
};

/// Transmission between two joints: qd_slave = ratio * qd_master (1 row).
class CoactuationConstraint : public Constraint {
 public:
  CoactuationConstraint(std::string name, const rbd::RobotModel& model, std::string master, std::string slave,
                        double ratio);
  const std::string& master() const { return master_; }
  const std::string& slave() const { return slave_; }
  int masterDof() const { return masterDof_; }
  int slaveDof() const { return slaveDof_; }
  double ratio() const { return inputs_.ratio; }
  using Constraint::jacobian;
  void jacobian(const rbd::RobotModel& model, const ConstraintInputs& inputs, Eigen::Ref<Matrix> out) const override;
  bool constrainsJoint(std::string_view joint) const override { return joint == slave_; }
  void declareParameters(param::ParameterRegistry& registry) override;

 private:
  std::string master_, slave_;
  int masterDof_, slaveDof_;
};

/// Ordered constraint definitions with their servo-side inputs.
class ConstraintSet {
 public:
  Constraint& add(std::unique_ptr<Constraint> constraint, bool enabled = true);
  const std::vector<std::unique_ptr<Constraint>>& constraints() const { return constraints_; }
  Constraint* find(std::string_view name) const;
  /// Rows if every constraint were enabled.
  int capacity() const { return capacity_; }
  bool isConstrained(std::string_view joint) const;
  /// Copies the current inputs; out keeps its capacity across calls.
  void latch(std::vector<ConstraintInputs>& out) const;
  void declareParameters(param::ParameterRegistry& registry);

 private:
  std::vector<std::unique_ptr<Constraint>> constraints_;
  int capacity_ = 0;
};

/// Constraint-derived projections for one model state.
///
/// With J_c stacked from the enabled constraints (disabled ones as zero rows):
///   N_c     = I - Ainv J_c^T (J_c Ainv J_c^T)^+ J_c
///   UNc     = U N_c
///   Phi     = UNc Ainv UNc^T
///   UNcBar  = Ainv UNc^T Phi^+
///   Lstar   = I - UNc UNcBar
class ConstraintProjection {
 public:
  ConstraintProjection(const rbd::RobotModel& model, const ConstraintSet& set, double tolerance = kDefaultPinvTolerance);

  void setTolerance(double tolerance);

  /// Allocation-free for a fixed constraint set.
  void update(const rbd::RobotModel& model, const ConstraintSet& set, const std::vector<ConstraintInputs>& inputs);
  /// Uses the constraints' current servo-side inputs. Allocates; for setup and tests.
  void update(const rbd::RobotModel& model, const ConstraintSet& set);

  /// Padded stack (capacity x n); disabled constraints are zero rows.
  const Matrix& paddedJacobian() const { return jc_; }
  int activeRows() const { return activeRows_; }
  /// Rows of enabled constraints only. Allocates.
  Matrix jacobian() const;

  const Matrix& nullspace() const { return nc_; }
  const Matrix& projectedActuation() const { return unc_; }
  const Matrix& phi() const { return phi_; }
  const Matrix& actuationInverse() const { return uncBar_; }
  const Matrix& internalForceProjector() const { return lstar_; }
  /// UNcBar^T G and UNcBar^T B.
  const Vector& projectedGravity() const { return projectedGravity_; }
  const Vector& projectedCoriolis() const { return projectedCoriolis_; }

 private:
  Matrix jc_;
  int activeRows_ = 0;
  Matrix jcBar_, nc_, unc_, phi_, uncBar_, lstar_;
  Vector projectedGravity_, projectedCoriolis_;
  DynamicallyConsistentInverse contactInverse_;
  DynamicallyConsistentInverse actuationInverse_;
  std::vector<ConstraintInputs> scratchInputs_;
  std::vector<int> blockRows_;
  std::vector<char> blockEnabled_;
};

}  // namespace wbc::constraint
