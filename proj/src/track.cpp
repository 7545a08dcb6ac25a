#include "raceplan/track.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "raceplan/errors.hpp"
#include "raceplan/io_util.hpp"

namespace raceplan {

namespace {

constexpr double kClosureTol = 1e-6;  // required endpoint match for closed tracks [m]
constexpr double kHalfPi = 1.5707963267948966;

double wrap_pi(double a) {
    // wrap into (-pi, pi]
    double two_pi = 2.0 * M_PI;
    a = std::fmod(a, two_pi);
    if (a <= -M_PI) a += two_pi;
    if (a > M_PI) a -= two_pi;
    return a;
}

}  // namespace

Track3D Track3D::from_points(std::vector<TrackPoint> pts, bool closed) {
    if (pts.size() < 2) {
        throw InvariantError("track needs at least 2 points, got " + std::to_string(pts.size()));
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const TrackPoint& p = pts[i];
        const bool finite = std::isfinite(p.s) && p.position.allFinite() && std::isfinite(p.phi) &&
                            std::isfinite(p.mu) && std::isfinite(p.theta) &&
                            std::isfinite(p.w_left) && std::isfinite(p.w_right) &&
                            std::isfinite(p.v_off);
        if (!finite) throw InvariantError("non-finite value at track point " + std::to_string(i));
        if (i > 0 && !(p.s > pts[i - 1].s)) {
            throw InvariantError("s not strictly increasing at track point " + std::to_string(i));
        }
        if (p.w_left < 0.0 || p.w_right < 0.0) {
            throw InvariantError("negative track width at point " + std::to_string(i));
        }
        if (p.v_off <= 0.0) {
            throw InvariantError("v_off must be positive at point " + std::to_string(i));
        }
        if (std::abs(p.phi) > kHalfPi || std::abs(p.mu) > kHalfPi) {
            throw InvariantError("bank/pitch angle outside [-pi/2, pi/2] at point " +
                                 std::to_string(i));
        }
    }

    // rebase s to start at 0
    const double s0 = pts.front().s;
    for (TrackPoint& p : pts) p.s -= s0;

    if (closed) {
        const double gap = (pts.front().position - pts.back().position).norm();
        if (gap > kClosureTol) {
            std::ostringstream msg;
            msg << "closed track endpoints do not match: gap " << gap << " m exceeds "
                << kClosureTol << " m";
            throw InvariantError(msg.str());
        }
    }

    // unwrap theta to a continuous branch so interpolation never crosses a jump
    for (std::size_t i = 1; i < pts.size(); ++i) {
        pts[i].theta = pts[i - 1].theta + wrap_pi(pts[i].theta - pts[i - 1].theta);
    }

    Track3D t;
    t.points_ = std::move(pts);
    t.closed_ = closed;
    t.s_lap_ = t.points_.back().s;
    t.precompute_derivatives();
    return t;
}

void Track3D::precompute_derivatives() {
    const std::size_t n = points_.size();
    dphi_.assign(n, 0.0);
    dmu_.assign(n, 0.0);
    dtheta_.assign(n, 0.0);

    auto diff = [&](std::size_t i, auto get) {
        if (closed_) {
            // last point duplicates the first; differentiate over the n-1 unique points
            const std::size_t m = n - 1;
            const std::size_t iu = (i == n - 1) ? 0 : i;
            const std::size_t prev = (iu + m - 1) % m;
            const std::size_t next = (iu + 1) % m;
            const double ds_prev =
                (iu == 0) ? (s_lap_ - points_[m - 1].s) : (points_[iu].s - points_[prev].s);
            const double ds_next =
                (next == 0) ? (s_lap_ - points_[iu].s) : (points_[next].s - points_[iu].s);
            const double da = wrap_pi(get(next) - get(iu)) + wrap_pi(get(iu) - get(prev));
            return da / (ds_prev + ds_next);
        }
        if (i == 0) return wrap_pi(get(1) - get(0)) / (points_[1].s - points_[0].s);
        if (i == n - 1)
            return wrap_pi(get(n - 1) - get(n - 2)) / (points_[n - 1].s - points_[n - 2].s);
        return (wrap_pi(get(i + 1) - get(i)) + wrap_pi(get(i) - get(i - 1))) /
               (points_[i + 1].s - points_[i - 1].s);
    };

    for (std::size_t i = 0; i < n; ++i) {
        dphi_[i] = diff(i, [&](std::size_t k) { return points_[k].phi; });
        dmu_[i] = diff(i, [&](std::size_t k) { return points_[k].mu; });
        dtheta_[i] = diff(i, [&](std::size_t k) { return points_[k].theta; });
    }

    omega_z_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const TrackPoint& p = points_[i];
        omega_z_[i] = -std::sin(p.phi) * dmu_[i] + std::cos(p.mu) * std::cos(p.phi) * dtheta_[i];
    }

    domega_z_.assign(n, 0.0);
    auto diff_val = [&](std::size_t i, const std::vector<double>& a) {
        if (closed_) {
            const std::size_t m = n - 1;
            const std::size_t iu = (i == n - 1) ? 0 : i;
            const std::size_t prev = (iu + m - 1) % m;
            const std::size_t next = (iu + 1) % m;
            const double ds_prev =
                (iu == 0) ? (s_lap_ - points_[m - 1].s) : (points_[iu].s - points_[prev].s);
            const double ds_next =
                (next == 0) ? (s_lap_ - points_[iu].s) : (points_[next].s - points_[iu].s);
            return (a[next] - a[prev]) / (ds_prev + ds_next);
        }
        if (i == 0) return (a[1] - a[0]) / (points_[1].s - points_[0].s);
        if (i == n - 1) return (a[n - 1] - a[n - 2]) / (points_[n - 1].s - points_[n - 2].s);
        return (a[i + 1] - a[i - 1]) / (points_[i + 1].s - points_[i - 1].s);
    };
    for (std::size_t i = 0; i < n; ++i) domega_z_[i] = diff_val(i, omega_z_);
}

double Track3D::wrap_progress(double s) const {
    if (!closed_) return std::clamp(s, 0.0, s_lap_);
    double r = std::fmod(s, s_lap_);
    if (r < 0.0) r += s_lap_;
    // fmod can return s_lap_ itself after the negative fixup when s is a tiny
    // negative multiple; fold it back
    if (r >= s_lap_) r -= s_lap_;
    return r;
}

Track3D::Bracket Track3D::bracket(double s) const {
    const double sw = wrap_progress(s);
    Bracket br;
    auto it = std::upper_bound(points_.begin(), points_.end(), sw,
                               [](double v, const TrackPoint& p) { return v < p.s; });
    std::size_t i1 = static_cast<std::size_t>(it - points_.begin());
    if (i1 == 0) i1 = 1;
    if (i1 >= points_.size()) i1 = points_.size() - 1;
    br.i0 = i1 - 1;
    br.i1 = i1;
    const double ds = points_[br.i1].s - points_[br.i0].s;
    br.u = (sw - points_[br.i0].s) / ds;
    return br;
}

TrackAngles Track3D::angles_at(double s) const {
    const Bracket b = bracket(s);
    const TrackPoint& p0 = points_[b.i0];
    const TrackPoint& p1 = points_[b.i1];
    TrackAngles a;
    a.phi = p0.phi + b.u * (p1.phi - p0.phi);
    a.mu = p0.mu + b.u * (p1.mu - p0.mu);
    a.theta = p0.theta + b.u * (p1.theta - p0.theta);
    return a;
}

AngularRate Track3D::angular_rate(double s) const {
    const Bracket b = bracket(s);
    const TrackAngles a = angles_at(s);
    const double dphi = dphi_[b.i0] + b.u * (dphi_[b.i1] - dphi_[b.i0]);
    const double dmu = dmu_[b.i0] + b.u * (dmu_[b.i1] - dmu_[b.i0]);
    const double dtheta = dtheta_[b.i0] + b.u * (dtheta_[b.i1] - dtheta_[b.i0]);
    const double sphi = std::sin(a.phi), cphi = std::cos(a.phi);
    const double smu = std::sin(a.mu), cmu = std::cos(a.mu);
    AngularRate w;
    w.omega_x = dphi - smu * dtheta;
    w.omega_y = cphi * dmu + cmu * sphi * dtheta;
    w.omega_z = -sphi * dmu + cmu * cphi * dtheta;
    return w;
}

double Track3D::curvature_derivative(double s) const {
    const Bracket b = bracket(s);
    return domega_z_[b.i0] + b.u * (domega_z_[b.i1] - domega_z_[b.i0]);
}

RoadFramePose Track3D::pose_at(double s) const {
    const Bracket b = bracket(s);
    const TrackAngles a = angles_at(s);
    const double ct = std::cos(a.theta), st = std::sin(a.theta);
    const double cm = std::cos(a.mu), sm = std::sin(a.mu);
    const double cp = std::cos(a.phi), sp = std::sin(a.phi);
    // R = Rz(theta) * Ry(mu) * Rx(phi)
    Eigen::Matrix3d R;
    R << ct * cm, ct * sm * sp - st * cp, ct * sm * cp + st * sp,  //
        st * cm, st * sm * sp + ct * cp, st * sm * cp - ct * sp,   //
        -sm, cm * sp, cm * cp;
    RoadFramePose pose;
    const TrackPoint& p0 = points_[b.i0];
    const TrackPoint& p1 = points_[b.i1];
    pose.origin = p0.position + b.u * (p1.position - p0.position);
    pose.t = R.col(0);
    pose.n = R.col(1);
    pose.b = R.col(2);
    return pose;
}

Eigen::Vector3d Track3D::frenet_to_cartesian(double s, double n) const {
    const RoadFramePose pose = pose_at(s);
    return pose.origin + n * pose.n;
}

double Track3D::width_left(double s) const {
    const Bracket b = bracket(s);
    return points_[b.i0].w_left + b.u * (points_[b.i1].w_left - points_[b.i0].w_left);
}

double Track3D::width_right(double s) const {
    const Bracket b = bracket(s);
    return points_[b.i0].w_right + b.u * (points_[b.i1].w_right - points_[b.i0].w_right);
}

double Track3D::v_off_at(double s) const {
    const Bracket b = bracket(s);
    return points_[b.i0].v_off + b.u * (points_[b.i1].v_off - points_[b.i0].v_off);
}

Track3D Track3D::load(std::istream& in) {
    std::vector<TrackPoint> pts;
    bool closed = false;
    bool header_seen = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            std::string meta = trim(t.substr(1));
            meta.erase(std::remove_if(meta.begin(), meta.end(), ::isspace), meta.end());
            if (meta == "closed=true") closed = true;
            if (meta == "closed=false") closed = false;
            continue;
        }
        if (!header_seen) {
            std::string h = t;
            h.erase(std::remove_if(h.begin(), h.end(), ::isspace), h.end());
            if (h != "s,x,y,z,phi,mu,theta,w_left,w_right,v_off") {
                throw ParseError("track file line " + std::to_string(lineno) +
                                 ": unexpected header '" + t + "'");
            }
            header_seen = true;
            continue;
        }
        const std::vector<std::string> cols = split(t, ',');
        if (cols.size() != 10) {
            throw ParseError("track file line " + std::to_string(lineno) + ": expected 10 columns, got " +
                             std::to_string(cols.size()));
        }
        double v[10];
        for (int i = 0; i < 10; ++i) {
            const std::string cell = trim(cols[i]);
            try {
                std::size_t pos = 0;
                v[i] = std::stod(cell, &pos);
                if (pos != cell.size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw ParseError("track file line " + std::to_string(lineno) +
                                 ": bad number in column " + std::to_string(i + 1) + " ('" +
                                 cols[i] + "')");
            }
        }
        TrackPoint p;
        p.s = v[0];
        p.position = Eigen::Vector3d(v[1], v[2], v[3]);
        p.phi = v[4];
        p.mu = v[5];
        p.theta = v[6];
        p.w_left = v[7];
        p.w_right = v[8];
        p.v_off = v[9];
        pts.push_back(p);
    }
    if (!header_seen) throw ParseError("track file has no header row");
    return from_points(std::move(pts), closed);
}

Track3D Track3D::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open track file '" + path + "'");
    return load(in);
}

void Track3D::save(std::ostream& out) const {
    out << "# closed=" << (closed_ ? "true" : "false") << "\n";
    out << "s,x,y,z,phi,mu,theta,w_left,w_right,v_off\n";
    for (const TrackPoint& p : points_) {
        out << format_g9(p.s) << ',' << format_g9(p.position.x()) << ','
            << format_g9(p.position.y()) << ',' << format_g9(p.position.z()) << ','
            << format_g9(p.phi) << ',' << format_g9(p.mu) << ',' << format_g9(p.theta) << ','
            << format_g9(p.w_left) << ',' << format_g9(p.w_right) << ',' << format_g9(p.v_off)
            << "\n";
    }
}

void Track3D::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    save(out);
}

}  // namespace raceplan
