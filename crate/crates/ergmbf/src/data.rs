//! Built-in example data.
//!
//! The Florentine marriage network: 16 Renaissance families, 20 marriage
//! ties, and family wealth (in thousands of lira). `Pucci` has no marriage
//! ties and is kept as an isolate. The same data ships as CSV files under
//! `data/` for use with the command-line tools.

use crate::net::{AttributeTable, Network};

const FAMILIES: [&str; 16] = [
    "Acciaiuoli",
    "Albizzi",
    "Barbadori",
    "Bischeri",
    "Castellani",
    "Ginori",
    "Guadagni",
    "Lamberteschi",
    "Medici",
    "Pazzi",
    "Peruzzi",
    "Pucci",
    "Ridolfi",
    "Salviati",
    "Strozzi",
    "Tornabuoni",
];

const WEALTH: [f64; 16] = [
    10.0, 36.0, 55.0, 44.0, 20.0, 32.0, 8.0, 42.0, 103.0, 48.0, 49.0, 3.0, 27.0, 10.0, 146.0,
    48.0,
];

const MARRIAGES: [(&str, &str); 20] = [
    ("Acciaiuoli", "Medici"),
    ("Albizzi", "Ginori"),
    ("Albizzi", "Guadagni"),
    ("Albizzi", "Medici"),
    ("Barbadori", "Castellani"),
    ("Barbadori", "Medici"),
    ("Bischeri", "Guadagni"),
    ("Bischeri", "Peruzzi"),
    ("Bischeri", "Strozzi"),
    ("Castellani", "Peruzzi"),
    ("Castellani", "Strozzi"),
    ("Guadagni", "Lamberteschi"),
    ("Guadagni", "Tornabuoni"),
    ("Medici", "Ridolfi"),
    ("Medici", "Salviati"),
    ("Medici", "Tornabuoni"),
    ("Pazzi", "Salviati"),
    ("Peruzzi", "Strozzi"),
    ("Ridolfi", "Strozzi"),
    ("Ridolfi", "Tornabuoni"),
];

/// The Florentine marriage network with the `wealth` attribute attached.
pub fn florentine() -> Network {
    let index = |name: &str| FAMILIES.iter().position(|f| *f == name).unwrap();
    let edges: Vec<(usize, usize)> = MARRIAGES.iter().map(|&(a, b)| (index(a), index(b))).collect();
    let mut attrs = AttributeTable::new(16);
    attrs.insert_numeric("wealth", WEALTH.to_vec()).unwrap();
    Network::from_edges(16, false, &edges)
        .unwrap()
        .with_labels(FAMILIES.iter().map(|s| s.to_string()).collect())
        .unwrap()
        .with_attributes(attrs)
        .unwrap()
}
