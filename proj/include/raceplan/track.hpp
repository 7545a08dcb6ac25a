#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace raceplan {

// One discretization point of the race-line spine.
// Angles are zyx Euler angles (theta = heading about z, mu = pitch about y,
// phi = bank about x) of the local road plane.
struct TrackPoint {
    double s = 0.0;                                // arclength progress [m]
    Eigen::Vector3d position = Eigen::Vector3d::Zero();  // spine point [m]
    double phi = 0.0;                              // bank [rad]
    double mu = 0.0;                               // pitch [rad]
    double theta = 0.0;                            // heading [rad]
    double w_left = 0.0;                           // track width left of spine [m]
    double w_right = 0.0;                          // track width right of spine [m]
    double v_off = 1.0;                            // offline reference speed [m/s]
};

// Angular velocity of the road frame per unit progress, expressed in the
// road frame. omega_z is what we call curvature.
struct AngularRate {
    double omega_x = 0.0;
    double omega_y = 0.0;
    double omega_z = 0.0;
};

// Orthonormal moving frame on the spine: tangent, in-plane normal, bi-normal.
struct RoadFramePose {
    Eigen::Vector3d origin;
    Eigen::Vector3d t;
    Eigen::Vector3d n;
    Eigen::Vector3d b;
};

struct TrackAngles {
    double phi = 0.0;
    double mu = 0.0;
    double theta = 0.0;
};

// Immutable 3D track built around a discretized spine. All queries are pure;
// concurrent readers are safe. Positions, angles, widths and v_off are
// interpolated linearly between stored points; angle derivatives come from
// finite differences on the stored grid (cyclic across the seam when closed).
class Track3D {
public:
    Track3D() = default;

    // Validates invariants, rebases s to start at 0, unwraps theta to a
    // continuous branch and precomputes grid derivatives.
    // Throws InvariantError naming the first offending point.
    static Track3D from_points(std::vector<TrackPoint> pts, bool closed);

    // CSV with header s,x,y,z,phi,mu,theta,w_left,w_right,v_off and an
    // optional "# closed=true|false" comment line (default false).
    // Throws ParseError with the offending line number.
    static Track3D load(std::istream& in);
    static Track3D load_file(const std::string& path);
    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;

    bool closed() const { return closed_; }
    double s_lap() const { return s_lap_; }
    std::size_t size() const { return points_.size(); }
    const std::vector<TrackPoint>& points() const { return points_; }

    // s mod s_lap into [0, s_lap) for closed tracks; clamp to [0, s_lap]
    // for open ones.
    double wrap_progress(double s) const;

    TrackAngles angles_at(double s) const;
    AngularRate angular_rate(double s) const;
    double curvature(double s) const { return angular_rate(s).omega_z; }
    // d(omega_z)/ds, interpolated from grid differences.
    double curvature_derivative(double s) const;
    RoadFramePose pose_at(double s) const;
    Eigen::Vector3d frenet_to_cartesian(double s, double n) const;
    double width_left(double s) const;
    double width_right(double s) const;
    double v_off_at(double s) const;

private:
    struct Bracket {
        std::size_t i0 = 0;
        std::size_t i1 = 0;
        double u = 0.0;
    };
    Bracket bracket(double s) const;
    void precompute_derivatives();

    std::vector<TrackPoint> points_;
    bool closed_ = false;
    double s_lap_ = 0.0;
    std::vector<double> dphi_, dmu_, dtheta_;  // d/ds at grid points
    std::vector<double> omega_z_, domega_z_;   // curvature and its rate at grid points
};

}  // namespace raceplan
