use super::{
    build_primitive, HandPose, JointLimits, Mat3, PartLabel, Rgb, SceneError, ShapeKind, ShapeSpec,
    Tessellation, Transform, TriangleMesh, Vec3,
};

/// Articulated hand plus forearm, expressed in the wrist frame.
///
/// Wrist frame convention: fingers extend along `+X`, the palm lies in the
/// `XZ` plane with its normal along `+Y`, and the forearm extends along `-X`.
/// The hand rotates rigidly about the wrist origin by `gamma`; the arm only
/// follows the arm pose.
#[derive(Debug, Clone)]
pub struct HandModel {
    pub hand: Vec<TriangleMesh>,
    pub arm: TriangleMesh,
    pub limits: JointLimits,
}

pub const DEFAULT_HAND_COLOR: Rgb = Rgb::gray(0.8);
pub const DEFAULT_ARM_COLOR: Rgb = Rgb::new(0.68, 0.68, 0.7);

impl Default for HandModel {
    fn default() -> Self {
        HandModel::procedural(Tessellation::default(), DEFAULT_HAND_COLOR, DEFAULT_ARM_COLOR)
    }
}

fn placed(kind: ShapeKind, color: Rgb, tess: Tessellation, t: Transform, label: PartLabel) -> TriangleMesh {
    build_primitive(&ShapeSpec::new(kind, color), tess)
        .expect("built-in hand dimensions are valid")
        .transformed(&t)
        .with_label(label)
}

/// Capsule whose hemisphere centers sit at `from` and `to`.
fn segment(from: Vec3, to: Vec3, radius: f64, color: Rgb, tess: Tessellation) -> TriangleMesh {
    let axis = to - from;
    placed(
        ShapeKind::Spherocylinder {
            radius,
            length: axis.length(),
        },
        color,
        tess,
        Transform::new(Mat3::align_z_to(axis), (from + to) * 0.5),
        PartLabel::Hand,
    )
}

impl HandModel {
    /// Palm block, five rigid two-segment fingers and a forearm cylinder.
    pub fn procedural(tess: Tessellation, hand_color: Rgb, arm_color: Rgb) -> Self {
        let mut hand = vec![placed(
            ShapeKind::Parallelepiped {
                x: 0.085,
                y: 0.028,
                z: 0.08,
            },
            hand_color,
            tess,
            Transform::new(Mat3::IDENTITY, Vec3::new(0.0475, 0.0, 0.0)),
            PartLabel::Hand,
        )];
        // (z offset, proximal length, distal length, radius)
        let fingers = [
            (-0.03, 0.030, 0.022, 0.0080),
            (-0.01, 0.038, 0.028, 0.0085),
            (0.01, 0.040, 0.030, 0.0085),
            (0.03, 0.036, 0.026, 0.0085),
        ];
        let curl = Mat3::rot_z(-20.0);
        for (z, l1, l2, r) in fingers {
            let base = Vec3::new(0.085, 0.0, z);
            let knuckle = base + Vec3::X * l1;
            let tip = knuckle + curl.apply(Vec3::X) * l2;
            hand.push(segment(base, knuckle, r, hand_color, tess));
            hand.push(segment(knuckle, tip, r * 0.92, hand_color, tess));
        }
        let thumb_base = Vec3::new(0.03, 0.0, 0.04);
        let thumb_mid = thumb_base + Vec3::new(0.6, -0.2, 0.75).normalized() * 0.032;
        let thumb_tip = thumb_mid + Vec3::new(0.9, -0.1, 0.4).normalized() * 0.026;
        hand.push(segment(thumb_base, thumb_mid, 0.0105, hand_color, tess));
        hand.push(segment(thumb_mid, thumb_tip, 0.0095, hand_color, tess));

        let arm = placed(
            ShapeKind::EllipticCylinder {
                a: 0.035,
                b: 0.03,
                height: 0.26,
            },
            arm_color,
            tess,
            Transform::new(Mat3::align_z_to(Vec3::X), Vec3::new(-0.125, 0.0, 0.0)),
            PartLabel::Arm,
        );
        HandModel {
            hand,
            arm,
            limits: JointLimits::default(),
        }
    }

    /// Replace the procedural hand with an imported mesh (already in the
    /// wrist frame), keeping the procedural forearm.
    pub fn with_hand_mesh(mut self, mesh: TriangleMesh) -> Self {
        self.hand = vec![mesh.with_label(PartLabel::Hand)];
        self
    }

    pub fn with_limits(mut self, limits: JointLimits) -> Self {
        self.limits = limits;
        self
    }

    /// Place the model in the world: hand meshes first, then the arm when
    /// `attach_arm` is set.
    pub fn build(&self, pose: &HandPose, attach_arm: bool) -> Result<Vec<TriangleMesh>, SceneError> {
        self.limits.check(pose.gamma)?;
        let wrist = pose.arm_pose.transform();
        let hand_t = wrist.then_local(&Transform::new(pose.hand_rotation(), Vec3::ZERO));
        let mut out: Vec<TriangleMesh> = self.hand.iter().map(|m| m.transformed(&hand_t)).collect();
        if attach_arm {
            out.push(self.arm.transformed(&wrist));
        }
        Ok(out)
    }

    /// Maximum distance of any hand vertex from the wrist origin.
    pub fn hand_reach(&self) -> f64 {
        self.hand
            .iter()
            .flat_map(|m| m.vertices.iter())
            .map(|v| v.length())
            .fold(0.0, f64::max)
    }

    /// Centroid of the hand vertices in the wrist frame.
    pub fn hand_centroid(&self) -> Vec3 {
        let (sum, n) = self
            .hand
            .iter()
            .flat_map(|m| m.vertices.iter())
            .fold((Vec3::ZERO, 0usize), |(s, n), &v| (s + v, n + 1));
        if n == 0 {
            Vec3::ZERO
        } else {
            sum / n as f64
        }
    }
}

/// Build the default procedural hand (and optionally the arm) at `pose`.
pub fn build_hand_arm(pose: &HandPose, attach_arm: bool) -> Result<Vec<TriangleMesh>, SceneError> {
    HandModel::default().build(pose, attach_arm)
}
