pub mod numerics;
pub mod initial_data;
pub mod hopf;
pub mod diffpoly;
pub mod spectral;
pub mod painleve;
pub mod rh;
pub mod universality;
