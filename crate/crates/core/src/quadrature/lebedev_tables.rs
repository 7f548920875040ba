// Orbit generators of the Lebedev-Laikov rules; weights are normalized to sum to one.
use super::Orbit;

pub(super) const TABLES: &[(usize, usize, &[Orbit])] = &[
    (6, 3, &[
        Orbit::A1(0.1666666666666667),
    ]),
    (14, 5, &[
        Orbit::A1(0.06666666666666667),
        Orbit::A3(0.075),
    ]),
    (26, 7, &[
        Orbit::A1(0.04761904761904762),
        Orbit::A2(0.0380952380952381),
        Orbit::A3(0.03214285714285714),
    ]),
    (38, 9, &[
        Orbit::A1(0.009523809523809525),
        Orbit::A3(0.03214285714285714),
        Orbit::C(0.8880738339771153, 0.02857142857142857),
    ]),
    (50, 11, &[
        Orbit::A1(0.0126984126984127),
        Orbit::A2(0.02257495590828924),
        Orbit::A3(0.02109375),
        Orbit::B(0.3015113445777636, 0.02017333553791887),
    ]),
    (74, 13, &[
        Orbit::A1(0.0005130671797338464),
        Orbit::A2(0.01660406956574204),
        Orbit::A3(-0.02958603896103896),
        Orbit::B(0.4803844614152614, 0.02657620708215946),
        Orbit::C(0.9471562213625879, 0.01652217099371571),
    ]),
    (86, 15, &[
        Orbit::A1(0.01154401154401154),
        Orbit::A3(0.01194390908585628),
        Orbit::B(0.3696028464541502, 0.0111105557106034),
        Orbit::B(0.6943540066026664, 0.01187650129453714),
        Orbit::C(0.9273306571511725, 0.01181230374690448),
    ]),
    (110, 17, &[
        Orbit::A1(0.0038282704949371615),
        Orbit::A3(0.009793737512487513),
        Orbit::B(0.1851156353447362, 0.008211737283191111),
        Orbit::B(0.6904210483822922, 0.009942814891178103),
        Orbit::B(0.3956894730559419, 0.009595471336070962),
        Orbit::C(0.8781589106040661, 0.009694996361663029),
    ]),
    (146, 19, &[
        Orbit::A1(0.0005996313688621381),
        Orbit::A2(0.007372999718620756),
        Orbit::A3(0.007210515360144488),
        Orbit::B(0.6764410400114264, 0.007116355493117555),
        Orbit::B(0.4174961227965453, 0.006753829486314477),
        Orbit::B(0.1574676672039082, 0.007574394159054035),
        Orbit::D(0.8822700112603227, 0.4493328323269557, 0.006991087353303262),
    ]),
];
