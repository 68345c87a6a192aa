use super::{QSqrt2, Tag, TaggedReal};

/// Expression shapes covered by the transcendence table.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TranscendentalForm {
    Exp,
}

/// One trusted fact. The table is the whole trusted base for irrationality
/// claims about non-algebraic values.
#[derive(Clone, Copy, Debug)]
pub struct TableEntry {
    pub name: &'static str,
    pub form: &'static str,
    pub statement: &'static str,
}

pub const TRANSCENDENCE_TABLE: &[TableEntry] = &[TableEntry {
    name: "exp-nonzero-rational",
    form: "exp(q), q rational, q != 0",
    statement: "e^q is transcendental (Lindemann), hence irrational",
}];

#[derive(Clone, Debug, PartialEq)]
pub struct Lookup {
    pub tag: Tag,
    /// Table entry that justified the tag, if any.
    pub entry: Option<&'static str>,
    pub value: TaggedReal,
}

/// Looks up the rationality of `form(arg)` in the transcendence table.
pub fn transcendence_axiom_lookup(form: TranscendentalForm, arg: &TaggedReal) -> Lookup {
    match form {
        TranscendentalForm::Exp => {
            let approx = arg.to_f64().exp();
            match arg.as_exact().and_then(QSqrt2::as_rational) {
                Some(q) if num_traits::Zero::is_zero(q) => Lookup {
                    tag: Tag::Rational,
                    entry: None,
                    value: TaggedReal::exact(QSqrt2::one()),
                },
                Some(_) => Lookup {
                    tag: Tag::Irrational,
                    entry: Some(TRANSCENDENCE_TABLE[0].name),
                    value: TaggedReal::transcendental(approx),
                },
                None => Lookup { tag: Tag::Unknown, entry: None, value: TaggedReal::approx(approx) },
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{int, QSqrt2};
    use super::*;

    #[test]
    fn table_examples() {
        let l = transcendence_axiom_lookup(TranscendentalForm::Exp, &TaggedReal::rational(int(-4)));
        assert_eq!(l.tag, Tag::Irrational);
        assert_eq!(l.entry, Some("exp-nonzero-rational"));
        assert!((l.value.to_f64() - (-4f64).exp()).abs() < 1e-15);
        let l = transcendence_axiom_lookup(TranscendentalForm::Exp, &TaggedReal::rational(int(0)));
        assert_eq!(l.tag, Tag::Rational);
        assert_eq!(l.value.as_exact(), Some(&QSqrt2::one()));
        let l = transcendence_axiom_lookup(TranscendentalForm::Exp, &TaggedReal::exact(QSqrt2::sqrt2()));
        assert_eq!(l.tag, Tag::Unknown);
    }
}
