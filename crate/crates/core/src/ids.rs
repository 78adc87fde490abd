//! Interned identifiers.
//!
//! Every name in a model (places, transitions, kinds, channels, variables)
//! is a cheaply clonable shared string. Distinct newtypes keep system-level
//! and object-level names from being mixed up.

use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(name: impl AsRef<str>) -> Self {
                Self(Arc::from(name.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({:?})", stringify!($name), &*self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self::new(s)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(Arc::from(s))
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

name_type!(
    /// A place of the system net.
    PlaceId
);
name_type!(
    /// A transition of the system net.
    TransitionId
);
name_type!(
    /// A place of an object net, drawn from its kind's place universe.
    ObjPlaceId
);
name_type!(
    /// A transition of an object net.
    ObjTransId
);
name_type!(
    /// Name of a net type.
    KindName
);
name_type!(
    /// Synchronisation channel.
    Channel
);
name_type!(
    /// Term variable.
    VarName
);
