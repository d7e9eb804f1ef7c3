//! Published reference values for the built-in tables, kept verbatim as
//! printed. Nothing in this module is computed.

/// `(c, exact, dk1)`.
pub type Table1Cell = (f64, &'static str, &'static str);
/// `(id, gamma, lambda, cells)`.
pub type Table1Panel = (&'static str, f64, f64, [Table1Cell; 3]);
/// `(id, exact[y][u], dk2[y])`.
pub type Table2Panel = (&'static str, [[&'static str; 5]; 5], [&'static str; 5]);

pub const TABLE1: [Table1Panel; 4] = [
    ("1a", 0.0, 5.0 / 6.0, [(3.0, "0.0154", "0.1211"), (5.0, "0.0080", "0.0999"), (7.0, "0.0060", "0.0929")]),
    ("1b", 0.0, 10.0 / 11.0, [(3.0, "0.0174", "0.1271"), (5.0, "0.0089", "0.1024"), (7.0, "0.0059", "0.0944")]),
    ("1c", 1.0, 5.0 / 6.0, [(3.0, "0.0736", "0.6340"), (5.0, "0.0353", "0.3548"), (7.0, "0.0231", "0.2922")]),
    ("1d", 1.0, 10.0 / 11.0, [(3.0, "0.0850", "0.7512"), (5.0, "0.0396", "0.3795"), (7.0, "0.0257", "0.3047")]),
];

pub const TABLE2_Y: [f64; 5] = [0.1, 0.25, 0.5, 1.0, 2.0];
pub const TABLE2_U: [f64; 5] = [0.1, 0.25, 0.5, 1.0, 2.0];

pub const TABLE2: [Table2Panel; 4] = [
    (
        "2a",
        [
            ["0.0080", "0.0184", "0.0367", "0.0640", "0.0754"],
            ["0.0227", "0.0365", "0.0550", "0.0742", "0.0736"],
            ["0.0495", "0.0625", "0.0758", "0.0821", "0.0098"],
            ["0.0773", "0.0818", "0.0832", "0.0748", "0.0521"],
            ["0.0521", "0.0506", "0.0463", "0.0372", "0.0233"],
        ],
        ["0.2900", "0.2726", "0.2220", "0.1547", "0.1905"],
    ),
    (
        "2b",
        [
            ["0.0034", "0.0084", "0.0176", "0.0290", "0.0241"],
            ["0.0091", "0.0100", "0.0233", "0.0304", "0.0228"],
            ["0.0194", "0.0243", "0.0294", "0.0303", "0.0194"],
            ["0.0300", "0.0309", "0.0301", "0.0247", "0.0132"],
            ["0.0205", "0.0189", "0.0161", "0.0114", "0.0054"],
        ],
        ["0.0735", "0.0681", "0.0555", "0.0387", "0.0476"],
    ),
    (
        "2c",
        [
            ["0.0035", "0.0087", "0.0183", "0.0306", "0.0272"],
            ["0.0094", "0.0156", "0.0244", "0.0322", "0.0252"],
            ["0.0202", "0.0254", "0.0309", "0.0324", "0.0217"],
            ["0.0317", "0.0328", "0.0322", "0.0270", "0.0152"],
            ["0.0227", "0.0211", "0.0183", "0.0134", "0.0068"],
        ],
        ["0.0779", "0.0723", "0.0592", "0.0413", "0.0494"],
    ),
    (
        "2d",
        [
            ["0.0001", "0.0003", "0.0007", "0.0016", "0.0023"],
            ["0.0003", "0.0006", "0.0011", "0.0018", "0.0024"],
            ["0.0008", "0.0011", "0.0015", "0.0021", "0.0023"],
            ["0.0017", "0.0019", "0.0021", "0.0023", "0.0020"],
            ["0.0022", "0.0022", "0.0022", "0.0020", "0.0014"],
        ],
        ["0.0054", "0.0052", "0.0046", "0.0035", "0.0027"],
    ),
];

/// Table 3 rows: `(D, D~, exact, dk3)`.
pub const TABLE3: [(f64, f64, &str, &str); 7] = [
    (1.0, 0.1, "0.0854", "0.4837"),
    (0.5, 0.1, "0.0559", "0.4337"),
    (0.5, 1.0 / 3.0, "0.0271", "0.2004"),
    (2.0, 1.0, "0.0496", "0.2837"),
    (2.0, 0.1, "0.1148", "0.5087"),
    (3.0, 0.1, "0.1305", "0.5171"),
    (3.0, 0.05, "0.1334", "0.5254"),
];

pub const ITERATE_K: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

/// Iterate tables: `(id, exact K(1), cells[n-1][k])`.
pub const ITERATES: [(&str, &str, [[&str; 6]; 5]); 2] = [
    (
        "4",
        "0.3325717",
        [
            ["0.2030029", "0.2624023", "0.3218018", "0.3812012", "0.4406006", "0.5000000"],
            ["0.3157823", "0.3229262", "0.3300700", "0.3372138", "0.3443576", "0.3515015"],
            ["0.3315714", "0.3319855", "0.3323996", "0.3328137", "0.3332278", "0.3336419"],
            ["0.3325381", "0.3325518", "0.3325655", "0.3325793", "0.3325930", "0.3326067"],
            ["0.3325709", "0.3325712", "0.3325717", "0.3325720", "0.3325721", "0.3325724"],
        ],
    ),
    (
        "5",
        "0.6573777",
        [
            ["0.4183691", "0.4846952", "0.5510214", "0.6173476", "0.6836738", "0.7500000"],
            ["0.6301684", "0.6375532", "0.6449379", "0.6523227", "0.6597075", "0.6670923"],
            ["0.6559814", "0.6563574", "0.6567334", "0.6571093", "0.65745853", "0.6578613"],
            ["0.6573377", "0.6573484", "0.6573591", "0.6573699", "0.6573806", "0.6573913"],
            ["0.6573769", "0.6573771", "0.6573773", "0.6573775", "0.6573777", "0.6573779"],
        ],
    ),
];

/// How a printed value is read when it is not a plain 7-decimal number.
pub fn reading(table: &str, cell: &str) -> Option<(f64, f64, &'static str)> {
    match (table, cell) {
        ("5", "n=3 k=0.8") => Some((
            0.6574853,
            5e-6,
            "printed 0.65745853 has a duplicated digit; read as 0.6574853 (iterates are affine in k)",
        )),
        _ => None,
    }
}

/// Published cells known not to be reproducible, with the reason.
pub fn documented(table: &str, cell: &str, quantity: &str) -> Option<&'static str> {
    match (table, quantity, cell) {
        ("1a", "exact", "c=7") => Some("published exact value breaks the monotone trend of its row; computed 0.0054"),
        ("2a", "dk2", "y=0.1") => Some("printed bound does not follow from the definitional Q_y"),
        ("2a" | "2b" | "2c", "dk2", "y=2") => Some("printed bound does not follow from the definitional Q_y"),
        ("3", "exact", "row=2" | "row=3" | "row=4") => {
            Some("published sup distance not reproduced by any tested reading of the row parameters")
        }
        _ => table2_exact_slip(table, cell, quantity),
    }
}

fn table2_exact_slip(table: &str, cell: &str, quantity: &str) -> Option<&'static str> {
    const SLIPS: &[(&str, &str)] = &[("2a", "y=0.5 u=2"), ("2b", "y=0.25 u=0.25")];
    (quantity == "exact" && SLIPS.contains(&(table, cell)))
        .then_some("printed value breaks the smooth pattern of its row and column")
}
