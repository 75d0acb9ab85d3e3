//! Name-keyed registries of strategy objects.

use crate::error::{Error, Result};

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: Vec<(&'static str, Box<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry { kind, entries: Vec::new() }
    }

    /// Adds `item` under `name`, replacing any earlier entry with that name.
    pub fn register(&mut self, name: &'static str, item: Box<T>) {
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = item,
            None => self.entries.push((name, item)),
        }
    }

    pub fn with(mut self, name: &'static str, item: Box<T>) -> Self {
        self.register(name, item);
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, item)| item.as_ref())
            .ok_or_else(|| Error::UnknownName(format!("{} {name:?}", self.kind)))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }
}

/// Splits `name:param` into its parts.
pub fn split_param(text: &str) -> Result<(&str, Option<i64>)> {
    match text.split_once(':') {
        None => Ok((text, None)),
        Some((name, p)) => {
            let v = p
                .parse()
                .map_err(|_| Error::Invalid(format!("parameter of {name:?} must be an integer")))?;
            Ok((name, Some(v)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Named {
        fn label(&self) -> String;
    }
    struct Fixed(&'static str);
    impl Named for Fixed {
        fn label(&self) -> String {
            self.0.to_string()
        }
    }

    #[test]
    fn lookup_and_replace() {
        let r: Registry<dyn Named> = Registry::new("thing");
        let r = r
            .with("x", Box::new(Fixed("first")))
            .with("y", Box::new(Fixed("why")))
            .with("x", Box::new(Fixed("second")));
        assert_eq!(r.get("x").unwrap().label(), "second");
        assert_eq!(r.names(), vec!["x", "y"]);
        assert!(matches!(r.get("z"), Err(Error::UnknownName(_))));
        assert_eq!(split_param("ak:3").unwrap(), ("ak", Some(3)));
        assert_eq!(split_param("w").unwrap(), ("w", None));
        assert!(split_param("rn:x").is_err());
    }
}
