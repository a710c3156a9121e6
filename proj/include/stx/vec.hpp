#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace stx {

template <typename T>
struct Vec2 {
    T x = 0, y = 0;

    constexpr Vec2() = default;
    constexpr Vec2(T x_, T y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(T s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(T s) const { return {x / s, y / s}; }
    constexpr bool operator==(const Vec2&) const = default;
};

template <typename T>
struct Vec3 {
    T x = 0, y = 0, z = 0;

    constexpr Vec3() = default;
    constexpr Vec3(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(T s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(T s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator*=(T s) { x *= s; y *= s; z *= s; return *this; }
    constexpr bool operator==(const Vec3&) const = default;

    constexpr T operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

template <typename T> constexpr T dot(const Vec2<T>& a, const Vec2<T>& b) { return a.x * b.x + a.y * b.y; }
template <typename T> constexpr T dot(const Vec3<T>& a, const Vec3<T>& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

template <typename T>
constexpr Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// 2D cross product (signed parallelogram area).
template <typename T> constexpr T cross(const Vec2<T>& a, const Vec2<T>& b) { return a.x * b.y - a.y * b.x; }

template <typename T> T norm(const Vec2<T>& v) { return std::sqrt(dot(v, v)); }
template <typename T> T norm(const Vec3<T>& v) { return std::sqrt(dot(v, v)); }
template <typename T> constexpr T norm2(const Vec3<T>& v) { return dot(v, v); }

template <typename T>
Vec3<T> normalized(const Vec3<T>& v) {
    T n = norm(v);
    return n > T(0) ? v / n : Vec3<T>{0, 0, 0};
}

template <typename T>
constexpr Vec3<T> lerp(const Vec3<T>& a, const Vec3<T>& b, T t) { return a + (b - a) * t; }
template <typename T>
constexpr Vec2<T> lerp(const Vec2<T>& a, const Vec2<T>& b, T t) { return a + (b - a) * t; }

template <typename T>
constexpr Vec3<T> clamped01(const Vec3<T>& v) {
    return {std::clamp(v.x, T(0), T(1)), std::clamp(v.y, T(0), T(1)), std::clamp(v.z, T(0), T(1))};
}

using Vec2d = Vec2<double>;
using Vec3d = Vec3<double>;
using Vec2f = Vec2<float>;
using Vec3f = Vec3<float>;

inline Vec3f to_f(const Vec3d& v) { return {float(v.x), float(v.y), float(v.z)}; }
inline Vec3d to_d(const Vec3f& v) { return {v.x, v.y, v.z}; }

}  // namespace stx
